#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ising/conditions.hpp"
#include "ising/estimators.hpp"
#include "ising/experiment.hpp"
#include "ising/metrics.hpp"
#include "ising/model.hpp"

namespace ising::io {

using nlohmann::json;

/// Shortest decimal that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

inline double parse_double(std::string_view s, std::string_view what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError("cannot parse " + std::string(what) + " from '" + std::string(s) + "'");
  return v;
}

template <class Int>
Int parse_int(std::string_view s, std::string_view what) {
  Int v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError("cannot parse " + std::string(what) + " from '" + std::string(s) + "'");
  return v;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

inline json parse_json(const std::string& text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string(what) + ": invalid JSON: " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Model JSON: {"p": int, "edges": [[i, j, theta_ij], ...]}, 1-based i < j,
// absent pairs are zero.

/// Writes pairs with |θij| > eps (eps = 0 writes every nonzero).
inline json model_to_json(const IsingModel& model, double eps = 0.0) {
  json edges = json::array();
  for (Index i = 0; i < model.p(); ++i)
    for (Index j = i + 1; j < model.p(); ++j)
      if (std::abs(model(i, j)) > eps) edges.push_back(json::array({i + 1, j + 1, model(i, j)}));
  return json{{"p", model.p()}, {"edges", std::move(edges)}};
}

inline IsingModel model_from_json(const json& j) {
  try {
    if (!j.is_object() || !j.contains("p") || !j.at("p").is_number_integer())
      throw ConfigError("model JSON: missing integer field 'p'");
    const auto p = j.at("p").get<Index>();
    if (p < 2) throw ConfigError("model JSON: p must be >= 2");
    IsingModel model(p);
    std::vector<bool> seen(static_cast<std::size_t>(num_pairs(p)), false);
    if (j.contains("edges")) {
      for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() || !e[1].is_number_integer() ||
            !e[2].is_number())
          throw ConfigError("model JSON: each edge must be [i, j, theta]");
        const auto i = e[0].get<Index>() - 1, k = e[1].get<Index>() - 1;
        if (i < 0 || k >= p || i >= k) throw ConfigError("model JSON: edge indices must satisfy 1 <= i < j <= p");
        const Index idx = pair_index(p, i, k);
        if (seen[static_cast<std::size_t>(idx)]) throw ConfigError("model JSON: duplicate edge");
        seen[static_cast<std::size_t>(idx)] = true;
        model.set(i, k, e[2].get<double>());
      }
    }
    return model;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model JSON: ") + e.what());
  }
}

inline IsingModel read_model(const std::string& path) {
  return model_from_json(parse_json(read_text(path), path));
}

inline json estimate_to_json(const Estimate& est, double eps) {
  json j = model_to_json(est.model, eps);
  j["method"] = std::string(method_name(est.method));
  j["lambda"] = est.lambda;
  json diag{{"iterations", est.iterations},
            {"converged", est.converged},
            {"kkt_residual", est.kkt_residual}};
  if (std::isfinite(est.objective)) diag["objective"] = est.objective;
  j["diagnostics"] = std::move(diag);
  return j;
}

// ---------------------------------------------------------------------------
// Dataset CSV: header X1..Xp, one row of ±1 per sample.

inline std::string dataset_to_csv(const Dataset& data) {
  std::string out;
  out.reserve(static_cast<std::size_t>(data.n() * data.p() * 3 + 8 * data.p()));
  for (Index j = 0; j < data.p(); ++j) {
    if (j) out += ',';
    out += "X" + std::to_string(j + 1);
  }
  out += '\n';
  for (Index i = 0; i < data.n(); ++i) {
    for (Index j = 0; j < data.p(); ++j) {
      if (j) out += ',';
      out += data.x()(i, j) > 0 ? "1" : "-1";
    }
    out += '\n';
  }
  return out;
}

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    std::string_view f = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
    fields.push_back(f);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

inline std::vector<std::string_view> csv_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
    start = nl + 1;
  }
  return lines;
}

}  // namespace detail

inline Dataset dataset_from_csv(std::string_view text) {
  const auto lines = detail::csv_lines(text);
  if (lines.empty()) throw ConfigError("dataset CSV: empty input");
  const auto header = detail::split_csv_line(lines[0]);
  const auto p = static_cast<Index>(header.size());
  for (Index j = 0; j < p; ++j)
    if (header[static_cast<std::size_t>(j)] != "X" + std::to_string(j + 1))
      throw ConfigError("dataset CSV: header column " + std::to_string(j + 1) + " must be X" + std::to_string(j + 1));
  MatrixXd x(static_cast<Index>(lines.size() - 1), p);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = detail::split_csv_line(lines[i]);
    if (static_cast<Index>(fields.size()) != p)
      throw ConfigError("dataset CSV: row " + std::to_string(i) + " has " + std::to_string(fields.size()) +
                        " fields, expected " + std::to_string(p));
    for (Index j = 0; j < p; ++j) {
      const auto f = fields[static_cast<std::size_t>(j)];
      if (f == "1" || f == "+1") x(static_cast<Index>(i - 1), j) = 1.0;
      else if (f == "-1") x(static_cast<Index>(i - 1), j) = -1.0;
      else throw ConfigError("dataset CSV: row " + std::to_string(i) + " has non-binary value '" + std::string(f) + "'");
    }
  }
  return Dataset(std::move(x));
}

inline Dataset read_dataset(const std::string& path) { return dataset_from_csv(read_text(path)); }

// ---------------------------------------------------------------------------
// Records CSV.

inline constexpr std::string_view kRecordsHeader =
    "method,p,n,replicate,seed,accuracy,err,solver_iterations,converged,wall_time_seconds";

inline std::string records_to_csv(const std::vector<ExperimentRecord>& records) {
  std::ostringstream out;
  out << kRecordsHeader << '\n';
  for (const auto& r : records) {
    out << method_name(r.method) << ',' << r.p << ',' << r.n << ',' << r.replicate << ',' << r.seed << ','
        << format_double(r.accuracy) << ',' << format_double(r.err) << ',' << r.solver_iterations << ','
        << (r.converged ? "true" : "false") << ',' << format_double(r.wall_time_seconds) << '\n';
  }
  return out.str();
}

inline std::vector<ExperimentRecord> records_from_csv(std::string_view text) {
  const auto lines = detail::csv_lines(text);
  if (lines.empty()) throw ConfigError("records CSV: empty input");
  const auto header = detail::split_csv_line(lines[0]);
  auto column = [&](std::string_view name) -> std::size_t {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == name) return c;
    throw ConfigError("records CSV: missing column '" + std::string(name) + "'");
  };
  const std::size_t c_method = column("method"), c_p = column("p"), c_n = column("n"),
                    c_rep = column("replicate"), c_seed = column("seed"), c_acc = column("accuracy"),
                    c_err = column("err"), c_it = column("solver_iterations"), c_conv = column("converged"),
                    c_time = column("wall_time_seconds");
  std::vector<ExperimentRecord> records;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = detail::split_csv_line(lines[i]);
    if (f.size() != header.size())
      throw ConfigError("records CSV: row " + std::to_string(i) + " has wrong number of fields");
    ExperimentRecord r;
    r.method = parse_method(f[c_method]);
    r.p = parse_int<Index>(f[c_p], "p");
    r.n = parse_int<Index>(f[c_n], "n");
    r.replicate = parse_int<int>(f[c_rep], "replicate");
    r.seed = parse_int<std::uint64_t>(f[c_seed], "seed");
    r.accuracy = parse_double(f[c_acc], "accuracy");
    r.err = parse_double(f[c_err], "err");
    r.solver_iterations = parse_int<int>(f[c_it], "solver_iterations");
    if (f[c_conv] == "true" || f[c_conv] == "1") r.converged = true;
    else if (f[c_conv] == "false" || f[c_conv] == "0") r.converged = false;
    else throw ConfigError("records CSV: bad converged value '" + std::string(f[c_conv]) + "'");
    r.wall_time_seconds = parse_double(f[c_time], "wall_time_seconds");
    records.push_back(r);
  }
  return records;
}

inline std::string summary_to_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << "method,n,count";
  for (const char* metric : {"accuracy", "err"})
    for (const char* stat : {"mean", "median", "q1", "q3", "iqr"}) out << ',' << metric << '_' << stat;
  out << '\n';
  auto put = [&](const SummaryStats& s) {
    for (double v : {s.mean, s.median, s.q1, s.q3, s.iqr}) out << ',' << format_double(v);
  };
  for (const auto& r : rows) {
    out << method_name(r.method) << ',' << r.n << ',' << r.count;
    put(r.accuracy);
    put(r.err);
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Experiment config JSON (field names mirror ExperimentConfig).

inline LambdaChoice lambda_choice_from_json(const json& j) {
  LambdaChoice c;
  if (j.is_null()) return c;
  if (j.is_number()) {
    c.nodewise = c.global = j.get<double>();
    return c;
  }
  if (!j.is_object()) throw ConfigError("config: lambda_override must be a number or an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "nodewise") c.nodewise = value.get<double>();
    else if (key == "global") c.global = value.get<double>();
    else throw ConfigError("config: unknown lambda_override field '" + key + "'");
  }
  return c;
}

inline ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  ExperimentConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "p") c.p = v.get<Index>();
      else if (key == "density") c.density = v.get<double>();
      else if (key == "coupling_magnitude") c.coupling_magnitude = v.get<double>();
      else if (key == "n_list") c.n_list = v.get<std::vector<Index>>();
      else if (key == "replicates") c.replicates = v.get<int>();
      else if (key == "methods") {
        c.methods.clear();
        for (const auto& m : v) c.methods.push_back(parse_method(m.get<std::string>()));
      } else if (key == "master_seed") c.master_seed = v.get<std::uint64_t>();
      else if (key == "model_seed") {
        if (!v.is_null()) c.model_seed = v.get<std::uint64_t>();
      } else if (key == "fresh_model") c.fresh_model = v.get<bool>();
      else if (key == "sampler") {
        const auto s = v.get<std::string>();
        if (s == "auto") c.sampler = SamplerKind::Auto;
        else if (s == "exact") c.sampler = SamplerKind::Exact;
        else if (s == "gibbs") c.sampler = SamplerKind::Gibbs;
        else throw ConfigError("config: sampler must be auto, exact or gibbs");
      } else if (key == "gibbs") {
        for (const auto& [gk, gv] : v.items()) {
          if (gk == "burn_in") c.gibbs.burn_in = gv.get<std::int64_t>();
          else if (gk == "thinning") c.gibbs.thinning = gv.get<std::int64_t>();
          else if (gk != "seed") throw ConfigError("config: unknown gibbs field '" + gk + "'");
        }
      } else if (key == "lambda_override") c.lambda_override = lambda_choice_from_json(v);
      else if (key == "eps") c.eps = v.get<double>();
      else if (key == "record_timing") c.record_timing = v.get<bool>();
      else if (key == "threads") c.threads = v.get<unsigned>();
      else throw ConfigError("config: unknown field '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline ExperimentConfig read_config(const std::string& path) {
  return config_from_json(parse_json(read_text(path), path));
}

// ---------------------------------------------------------------------------

inline json metrics_to_json(const AccuracyResult& acc, double error) {
  return json{{"tp", acc.counts.tp},     {"tn", acc.counts.tn}, {"fp", acc.counts.fp},
              {"fn", acc.counts.fn},     {"accuracy", acc.accuracy},
              {"err", error}};
}

namespace detail {

/// +inf has no JSON literal; emit null.
inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json matrix_to_json(const MatrixXd& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

/// Indices in the JSON are 1-based: node numbers for node scope, canonical
/// pair positions for the global scope.
inline json report_to_json(const ConditionReport& rep, std::optional<double> lambda = std::nullopt) {
  json j;
  j["scope"] = rep.scope.node ? "node" : "global";
  if (rep.scope.node) j["node"] = *rep.scope.node + 1;
  auto one_based = [](const std::vector<Index>& v) {
    std::vector<Index> out(v);
    for (auto& x : out) ++x;
    return out;
  };
  j["active"] = one_based(rep.active);
  j["d"] = rep.d();
  j["c_min"] = detail::finite_or_null(rep.c_min);
  j["incoherence"] = rep.incoherence ? json(*rep.incoherence) : json(nullptr);
  j["theta_min"] = detail::finite_or_null(rep.theta_min);
  j["lambda_threshold"] = detail::finite_or_null(rep.lambda_threshold);
  j["dependency_ok"] = rep.dependency_ok();
  j["incoherence_ok"] = rep.incoherence_ok();
  if (lambda) {
    j["lambda"] = *lambda;
    j["min_signal_ok"] = rep.min_signal_ok(*lambda);
  }
  j["fisher"] = detail::matrix_to_json(rep.fisher);
  return j;
}

}  // namespace ising::io
