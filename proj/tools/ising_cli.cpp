// Command-line front end: generate models, sample, fit, evaluate, and run
// replicated experiments.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "ising/ising.hpp"

namespace {

using namespace ising;
using nlohmann::json;

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
  } else {
    io::write_text(path, text);
  }
}

void emit_json(const std::string& path, const json& j) { emit(path, j.dump(2) + "\n"); }

SamplerKind parse_sampler(const std::string& s) {
  if (s == "auto") return SamplerKind::Auto;
  if (s == "exact") return SamplerKind::Exact;
  if (s == "gibbs") return SamplerKind::Gibbs;
  throw ConfigError("sampler must be auto, exact or gibbs");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse Ising model structure learning: node-wise and global l1-logistic estimators"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Draw a mixed-coupling model (model JSON out)");
  Index gen_p = 0;
  double gen_density = 0.0, gen_magnitude = 0.5;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--p", gen_p, "Number of nodes")->required();
  gen->add_option("--density", gen_density, "Fraction of active pairs in (0, 1]")->required();
  gen->add_option("--magnitude", gen_magnitude, "Coupling magnitude")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Random seed")->capture_default_str();
  gen->add_option("--out", gen_out, "Output path (stdout if omitted)");

  // sample
  auto* smp = app.add_subcommand("sample", "Sample a dataset from a model (dataset CSV out)");
  std::string smp_model, smp_out, smp_sampler = "auto";
  Index smp_n = 0;
  std::uint64_t smp_seed = 0;
  GibbsConfig smp_gibbs;
  smp->add_option("--model", smp_model, "Model JSON")->required();
  smp->add_option("--n", smp_n, "Number of samples")->required();
  smp->add_option("--seed", smp_seed, "Random seed")->capture_default_str();
  smp->add_option("--sampler", smp_sampler, "auto | exact | gibbs")->capture_default_str();
  smp->add_option("--burn-in", smp_gibbs.burn_in, "Gibbs burn-in sweeps")->capture_default_str();
  smp->add_option("--thinning", smp_gibbs.thinning, "Gibbs sweeps per retained sample")->capture_default_str();
  smp->add_option("--out", smp_out, "Output path (stdout if omitted)");

  // fit
  auto* fit = app.add_subcommand("fit", "Estimate a model from a dataset (model JSON out)");
  std::string fit_method_name, fit_data, fit_out;
  std::optional<double> fit_lambda;
  double fit_eps = kDefaultSupportEps;
  fit->add_option("--method", fit_method_name, "nlm | nlM | gl")->required();
  fit->add_option("--data", fit_data, "Dataset CSV")->required();
  fit->add_option("--lambda", fit_lambda, "Regularization weight (default: method's standard choice)");
  fit->add_option("--eps", fit_eps, "Couplings with |theta| <= eps are not written")->capture_default_str();
  fit->add_option("--out", fit_out, "Output path (stdout if omitted)");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Compare an estimate with the truth (metrics JSON out)");
  std::string ev_truth, ev_est, ev_out;
  double ev_eps = kDefaultSupportEps;
  ev->add_option("--truth", ev_truth, "True model JSON")->required();
  ev->add_option("--estimate", ev_est, "Estimated model JSON")->required();
  ev->add_option("--eps", ev_eps, "Support threshold")->capture_default_str();
  ev->add_option("--out", ev_out, "Output path (stdout if omitted)");

  // experiment
  auto* ex = app.add_subcommand("experiment", "Run replicated experiments (records CSV out)");
  std::string ex_config, ex_out;
  std::optional<unsigned> ex_threads;
  bool ex_timing = false;
  ex->add_option("--config", ex_config, "Experiment config JSON")->required();
  ex->add_option("--out", ex_out, "Output path (stdout if omitted)");
  ex->add_option("--threads", ex_threads, "Worker threads (0 = all cores)");
  ex->add_flag("--timing", ex_timing, "Record wall-clock times (output is then not reproducible)");

  // summarize
  auto* sm = app.add_subcommand("summarize", "Per-(method, n) statistics of a records CSV");
  std::string sm_in, sm_out;
  sm->add_option("--input", sm_in, "Records CSV")->required();
  sm->add_option("--out", sm_out, "Output path (stdout if omitted)");

  // check-conditions
  auto* cc = app.add_subcommand("check-conditions", "Support-recovery conditions by exact enumeration");
  std::string cc_model, cc_out;
  std::optional<Index> cc_node;
  std::optional<double> cc_lambda;
  cc->add_option("--model", cc_model, "Model JSON (p <= 12)")->required();
  cc->add_option("--node", cc_node, "1-based node for the node-wise conditions (global if omitted)");
  cc->add_option("--lambda", cc_lambda, "Evaluate the minimum-signal condition at this lambda");
  cc->add_option("--out", cc_out, "Output path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      emit_json(gen_out, io::model_to_json(generate_mixed_coupling(gen_p, gen_density, gen_magnitude, gen_seed)));
    } else if (*smp) {
      const IsingModel model = io::read_model(smp_model);
      const SamplerKind kind = parse_sampler(smp_sampler);
      Dataset data;
      if (kind == SamplerKind::Exact || (kind == SamplerKind::Auto && model.p() <= kMaxEnumerationNodes)) {
        data = sample_exact(model, smp_n, smp_seed);
      } else {
        smp_gibbs.seed = smp_seed;
        data = sample_gibbs(model, smp_n, smp_gibbs);
      }
      emit(smp_out, io::dataset_to_csv(data));
    } else if (*fit) {
      const MethodId method = parse_method(fit_method_name);
      const Dataset data = io::read_dataset(fit_data);
      LambdaChoice lambdas;
      if (fit_lambda) lambdas.nodewise = lambdas.global = *fit_lambda;
      emit_json(fit_out, io::estimate_to_json(fit_method(method, data, lambdas), fit_eps));
    } else if (*ev) {
      const IsingModel truth = io::read_model(ev_truth);
      const IsingModel est = io::read_model(ev_est);
      emit_json(ev_out, io::metrics_to_json(accuracy(truth, est, ev_eps), err(truth, est)));
    } else if (*ex) {
      ExperimentConfig config = io::read_config(ex_config);
      if (ex_threads) config.threads = *ex_threads;
      if (ex_timing) config.record_timing = true;
      emit(ex_out, io::records_to_csv(run_experiment(config)));
    } else if (*sm) {
      emit(sm_out, io::summary_to_csv(summarize(io::records_from_csv(io::read_text(sm_in)))));
    } else if (*cc) {
      const IsingModel model = io::read_model(cc_model);
      const ConditionScope scope = cc_node ? ConditionScope::of_node(*cc_node - 1) : ConditionScope::global();
      emit_json(cc_out, io::report_to_json(fisher_blocks(model, scope), cc_lambda));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
