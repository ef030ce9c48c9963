#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "popalloc/dynamics.hpp"
#include "popalloc/errors.hpp"
#include "popalloc/game.hpp"
#include "popalloc/graph.hpp"
#include "popalloc/trigger.hpp"

namespace popalloc {

enum class TriggerMode { none, distributed, centralized, constant };
enum class Lambda2Mode { recompute, frozen };

struct TriggerSettings {
  TriggerMode mode = TriggerMode::none;
  Eigen::VectorXd rho;                  // distributed
  double a = 0.0;                       // distributed
  std::optional<double> gamma;          // centralized
  std::optional<double> phi;            // centralized, defaults to gamma^(-1/2)
  std::optional<double> e_T;            // constant-threshold mode
  std::optional<Eigen::VectorXd> q;     // Zeno q_i override
  Lambda2Mode lambda2_mode = Lambda2Mode::recompute;
};

struct IntegratorSettings {
  double h = 1e-3;
  double T = 10.0;
};

struct OutputSettings {
  int sample_stride = 1;
};

struct ScenarioConfig {
  Graph graph;
  QuadraticPotential potential;
  Eigen::VectorXd initial;
  TriggerSettings trigger;
  IntegratorSettings integrator;
  OutputSettings output;
  std::vector<std::string> warnings;
};

struct TrajectorySample {
  double t = 0.0;
  Eigen::VectorXd p;
  Eigen::VectorXd f;
  double V = 0.0;  // Lyapunov value 1/2 f^T Pi^{-1} f
  double S = 0.0;  // potential value
};

struct Summary {
  Eigen::VectorXd p_final;
  Eigen::VectorXd f_final;
  double consensus_residual = 0.0;
  double conservation_error = 0.0;
  std::vector<long> trigger_count;
  std::vector<double> min_interevent;  // +inf encodes "fewer than 2 events"
  std::optional<ZenoBounds> zeno_bounds;
  int clamp_count = 0;
  bool feasibility_lost = false;
  std::optional<double> oracle_gap;
};

struct RunResult {
  std::vector<TrajectorySample> trajectory;
  std::vector<EventRecord> events;
  Summary summary;
};

/// Integration produced a non-finite state; carries what was computed so far.
class simulation_aborted : public numerical_error {
 public:
  simulation_aborted(const std::string& msg, RunResult partial)
      : numerical_error(msg), partial_(std::move(partial)) {}

  const RunResult& partial() const { return partial_; }

 private:
  RunResult partial_;
};

namespace detail {

inline const nlohmann::json& require_key(const nlohmann::json& obj, const std::string& key,
                                         const std::string& where) {
  if (!obj.is_object() || !obj.contains(key))
    throw validation_error(where.empty() ? key : where + "." + key, "missing field");
  return obj.at(key);
}

inline double as_number(const nlohmann::json& v, const std::string& field) {
  if (!v.is_number()) throw validation_error(field, "expected a number");
  return v.get<double>();
}

inline Eigen::VectorXd as_vector(const nlohmann::json& v, const std::string& field) {
  if (!v.is_array()) throw validation_error(field, "expected an array of numbers");
  Eigen::VectorXd out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = as_number(v[i], field);
  return out;
}

inline Eigen::VectorXd as_vector_or_scalar(const nlohmann::json& v, int n,
                                           const std::string& field) {
  if (v.is_number()) return Eigen::VectorXd::Constant(n, v.get<double>());
  Eigen::VectorXd out = as_vector(v, field);
  if (out.size() != n)
    throw validation_error(field, "expected length " + std::to_string(n) + ", got " +
                                      std::to_string(out.size()));
  return out;
}

inline void reject_unknown_keys(const nlohmann::json& obj,
                                std::initializer_list<const char*> known,
                                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw validation_error(where.empty() ? it.key() : where + "." + it.key(),
                             "unknown field");
  }
}

/// Fiedler value of the sub-Laplacian of one component (component size >= 2).
inline double component_fiedler(const Graph& g, const Eigen::VectorXd& p,
                                const std::vector<int>& members) {
  const int m = static_cast<int>(members.size());
  std::vector<int> slot(static_cast<size_t>(g.size()), -1);
  for (int k = 0; k < m; ++k) slot[static_cast<size_t>(members[static_cast<size_t>(k)])] = k;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(m, m);
  for (auto [i, j] : g.edges()) {
    const int si = slot[static_cast<size_t>(i)], sj = slot[static_cast<size_t>(j)];
    if (si < 0 || sj < 0) continue;
    const double w = p[i] * p[j];
    L(si, sj) -= w;
    L(sj, si) -= w;
    L(si, si) += w;
    L(sj, sj) += w;
  }
  return fiedler_value(L);
}

}  // namespace detail

/// Parse and validate a scenario document. "uniform" initial expands to
/// total/n; with normalize_initial an off-total initial is rescaled and a
/// warning recorded.
inline ScenarioConfig load_config(const nlohmann::json& doc) {
  using detail::as_number;
  using detail::as_vector;
  using detail::as_vector_or_scalar;
  using detail::require_key;

  if (!doc.is_object()) throw validation_error("document", "expected a JSON object");
  detail::reject_unknown_keys(
      doc, {"agents", "edges", "total", "initial", "normalize_initial", "integrator",
            "trigger", "output"},
      "");

  const double total = as_number(require_key(doc, "total", ""), "total");
  if (total <= 0.0) throw validation_error("total", "must be positive");

  // agents: dispatch cost rows or an explicit potential
  const nlohmann::json& agents = require_key(doc, "agents", "");
  std::optional<QuadraticPotential> pot;
  if (agents.is_array()) {
    const int n = static_cast<int>(agents.size());
    if (n < 1) throw validation_error("agents", "at least one agent required");
    DispatchCosts costs;
    costs.alpha.resize(n);
    costs.beta.resize(n);
    costs.gamma.resize(n);
    costs.demand = total;
    for (int i = 0; i < n; ++i) {
      const auto& row = agents[static_cast<size_t>(i)];
      const std::string where = "agents[" + std::to_string(i) + "]";
      detail::reject_unknown_keys(row, {"alpha", "beta", "gamma"}, where);
      costs.alpha[i] = as_number(require_key(row, "alpha", where), where + ".alpha");
      costs.beta[i] = as_number(require_key(row, "beta", where), where + ".beta");
      costs.gamma[i] = as_number(require_key(row, "gamma", where), where + ".gamma");
    }
    try {
      pot.emplace(from_dispatch(costs));
    } catch (const std::domain_error& e) {
      throw validation_error("agents", e.what());
    }
  } else if (agents.is_object()) {
    detail::reject_unknown_keys(agents, {"Pi", "b", "c"}, "agents");
    const nlohmann::json& pi_doc = require_key(agents, "Pi", "agents");
    Eigen::MatrixXd Pi;
    if (pi_doc.is_array() && !pi_doc.empty() && pi_doc[0].is_array()) {
      const int n = static_cast<int>(pi_doc.size());
      Pi.resize(n, n);
      for (int i = 0; i < n; ++i) {
        const auto row = as_vector(pi_doc[static_cast<size_t>(i)], "agents.Pi");
        if (row.size() != n) throw validation_error("agents.Pi", "must be square");
        Pi.row(i) = row;
      }
    } else {
      Pi = Eigen::MatrixXd(as_vector(pi_doc, "agents.Pi").asDiagonal());
    }
    const Eigen::VectorXd b = as_vector(require_key(agents, "b", "agents"), "agents.b");
    const double c =
        agents.contains("c") ? as_number(agents.at("c"), "agents.c") : 0.0;
    try {
      pot.emplace(std::move(Pi), b, c, total);
    } catch (const std::exception& e) {
      throw validation_error("agents", e.what());
    }
  } else {
    throw validation_error("agents", "expected cost rows or an explicit potential");
  }
  const int n = pot->size();

  // edges
  std::vector<std::pair<int, int>> edges;
  const nlohmann::json& edges_doc = require_key(doc, "edges", "");
  if (!edges_doc.is_array()) throw validation_error("edges", "expected an array of pairs");
  for (const auto& e : edges_doc) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
        !e[1].is_number_integer())
      throw validation_error("edges", "each edge must be a pair of agent ids");
    edges.emplace_back(e[0].get<int>(), e[1].get<int>());
  }
  std::optional<Graph> graph;
  try {
    graph.emplace(n, std::move(edges));
  } catch (const std::invalid_argument& e) {
    throw validation_error("edges", e.what());
  }

  std::vector<std::string> warnings;

  // initial allocation
  Eigen::VectorXd initial;
  const nlohmann::json& init_doc = require_key(doc, "initial", "");
  if (init_doc.is_string() && init_doc.get<std::string>() == "uniform") {
    initial = Eigen::VectorXd::Constant(n, total / n);
  } else if (init_doc.is_array()) {
    initial = as_vector(init_doc, "initial");
    if (initial.size() != n)
      throw validation_error("initial", "expected length " + std::to_string(n));
  } else {
    throw validation_error("initial", "expected \"uniform\" or an array");
  }
  if ((initial.array() < 0.0).any())
    throw validation_error("initial", "allocations must be non-negative");
  const bool normalize = doc.value("normalize_initial", false);
  const double sum = initial.sum();
  if (normalize && std::abs(sum - total) > 1e-9 * total) {
    if (sum <= 0.0) throw validation_error("initial", "cannot normalize a zero allocation");
    initial *= total / sum;
    warnings.push_back("initial allocation rescaled by " + std::to_string(total / sum) +
                       " to match total");
  } else if (std::abs(sum - total) > 1e-9 * total) {
    throw validation_error("initial", "sums to " + std::to_string(sum) +
                                          " but total is " + std::to_string(total));
  }

  // integrator
  IntegratorSettings integrator;
  if (doc.contains("integrator")) {
    const auto& it = doc.at("integrator");
    detail::reject_unknown_keys(it, {"h", "T"}, "integrator");
    if (it.contains("h")) integrator.h = as_number(it.at("h"), "integrator.h");
    if (it.contains("T")) integrator.T = as_number(it.at("T"), "integrator.T");
  }
  if (integrator.h <= 0.0) throw validation_error("integrator.h", "must be positive");
  if (integrator.T <= 0.0) throw validation_error("integrator.T", "must be positive");
  const auto steps = std::llround(integrator.T / integrator.h);
  if (steps < 1 || std::abs(steps * integrator.h - integrator.T) >
                       1e-9 * std::max(integrator.T, 1.0))
    throw validation_error("integrator", "T must be a whole number of steps h");

  // trigger
  TriggerSettings trigger;
  if (doc.contains("trigger")) {
    const auto& tr = doc.at("trigger");
    detail::reject_unknown_keys(
        tr, {"mode", "rho", "a", "gamma", "phi", "e_T", "q", "lambda2_mode"}, "trigger");
    const std::string mode = require_key(tr, "mode", "trigger").get<std::string>();
    if (mode == "none") {
      trigger.mode = TriggerMode::none;
    } else if (mode == "distributed") {
      trigger.mode = TriggerMode::distributed;
      trigger.rho = as_vector_or_scalar(require_key(tr, "rho", "trigger"), n, "trigger.rho");
      trigger.a = as_number(require_key(tr, "a", "trigger"), "trigger.a");
      DistributedRuleParams rule{trigger.rho, trigger.a};
      rule.validate();
      if (tr.contains("gamma"))
        trigger.gamma = as_number(tr.at("gamma"), "trigger.gamma");
    } else if (mode == "centralized") {
      trigger.mode = TriggerMode::centralized;
      trigger.gamma = as_number(require_key(tr, "gamma", "trigger"), "trigger.gamma");
      if (tr.contains("phi")) trigger.phi = as_number(tr.at("phi"), "trigger.phi");
      CentralizedRuleParams rule{*trigger.gamma,
                                 trigger.phi.value_or(1.0 / std::sqrt(*trigger.gamma))};
      rule.validate();
    } else if (mode == "constant") {
      trigger.mode = TriggerMode::constant;
      trigger.e_T = as_number(require_key(tr, "e_T", "trigger"), "trigger.e_T");
      if (*trigger.e_T <= 0.0) throw validation_error("trigger.e_T", "must be positive");
    } else {
      throw validation_error("trigger.mode", "unknown mode \"" + mode + "\"");
    }
    if (tr.contains("q")) {
      trigger.q = as_vector_or_scalar(tr.at("q"), n, "trigger.q");
      if ((trigger.q->array() <= 0.0).any())
        throw validation_error("trigger.q", "q_i must be positive");
    }
    if (tr.contains("lambda2_mode")) {
      const std::string lm = tr.at("lambda2_mode").get<std::string>();
      if (lm == "recompute")
        trigger.lambda2_mode = Lambda2Mode::recompute;
      else if (lm == "frozen")
        trigger.lambda2_mode = Lambda2Mode::frozen;
      else
        throw validation_error("trigger.lambda2_mode", "expected recompute or frozen");
    }
  }

  // output
  OutputSettings output;
  if (doc.contains("output")) {
    const auto& out = doc.at("output");
    detail::reject_unknown_keys(out, {"sample_stride"}, "output");
    if (out.contains("sample_stride")) {
      if (!out.at("sample_stride").is_number_integer())
        throw validation_error("output.sample_stride", "expected an integer");
      output.sample_stride = out.at("sample_stride").get<int>();
    }
  }
  if (output.sample_stride < 1)
    throw validation_error("output.sample_stride", "must be >= 1");

  ScenarioConfig cfg{std::move(*graph), std::move(*pot),     std::move(initial),
                     std::move(trigger), integrator,          output,
                     std::move(warnings)};

  // distributed-rule feasibility at the initial broadcast state, checked per
  // connected component (lambda2 of a disconnected Laplacian is 0)
  if (cfg.trigger.mode == TriggerMode::distributed) {
    DistributedRuleParams rule{cfg.trigger.rho, cfg.trigger.a};
    for (const auto& members : connected_components(cfg.graph)) {
      if (members.size() < 2) continue;
      const double lambda2 = detail::component_fiedler(cfg.graph, cfg.initial, members);
      for (int i : members) {
        if (lambda2 - rule.a * cfg.graph.degree(i) <= 0.0)
          throw infeasible_parameter_error(
              i, "trigger: infeasible at agent " + std::to_string(i) + ": lambda2 " +
                     std::to_string(lambda2) + " <= a*|N_i| " +
                     std::to_string(rule.a * cfg.graph.degree(i)));
      }
    }
  }
  return cfg;
}

inline ScenarioConfig load_config(const std::string& text) {
  return load_config(nlohmann::json::parse(text));
}

/// Dotted-path override "a.b.c=value" applied to a parsed document before
/// validation; the value is parsed as JSON, falling back to a raw string.
inline void apply_override(nlohmann::json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw validation_error("override", "expected key.path=value, got \"" + assignment + "\"");
  const std::string path = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  nlohmann::json parsed = nlohmann::json::parse(value, nullptr, false);
  if (parsed.is_discarded()) parsed = value;
  nlohmann::json* node = &doc;
  size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty()) throw validation_error("override", "empty key segment in " + path);
    if (dot == std::string::npos) {
      (*node)[key] = std::move(parsed);
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

/// Deterministic single-run orchestration: per step, evaluate the trigger
/// rule at the boundary, update broadcast values and the event log, then take
/// one guarded RK4 step of the active field.
inline RunResult run(const ScenarioConfig& cfg) {
  const Graph& g = cfg.graph;
  const QuadraticPotential& pot = cfg.potential;
  const int n = g.size();
  const double h = cfg.integrator.h;
  const long steps = std::llround(cfg.integrator.T / h);
  const int stride = cfg.output.sample_stride;
  const auto components = connected_components(g);
  const bool sampled_mode = cfg.trigger.mode != TriggerMode::none;

  RunResult res;
  res.trajectory.reserve(static_cast<size_t>(steps / stride + 2));

  Eigen::VectorXd p = cfg.initial;
  SampledState s = SampledState::synced(pot, p, 0.0);

  if (sampled_mode)
    for (int i = 0; i < n; ++i)
      if (g.degree(i) >= 1) res.events.push_back({0.0, i, s.f_hat[i], s.p_hat[i]});

  // per-agent trigger thresholds (distributed mode)
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);
  bool feasibility_lost = false;
  auto refresh_thresholds = [&]() {
    for (const auto& members : components) {
      if (members.size() < 2) continue;
      const double lambda2 = detail::component_fiedler(g, s.p_hat, members);
      for (int i : members) {
        const double slack = lambda2 - cfg.trigger.a * g.degree(i);
        if (slack <= 0.0) {
          theta[i] = 1e-12;  // floor; violation surfaced via the flag
          feasibility_lost = true;
        } else {
          theta[i] = cfg.trigger.rho[i] * cfg.trigger.a * slack / g.degree(i);
        }
      }
    }
  };
  if (cfg.trigger.mode == TriggerMode::distributed) refresh_thresholds();

  auto record_sample = [&](double t, const Eigen::VectorXd& state) {
    TrajectorySample sample;
    sample.t = t;
    sample.p = state;
    sample.f = pot.fitness(state);
    sample.V = lyapunov(pot, sample.f);
    sample.S = pot.value(state);
    res.trajectory.push_back(std::move(sample));
  };
  record_sample(0.0, p);

  int clamp_count = 0;
  std::vector<int> fired;
  fired.reserve(static_cast<size_t>(n));

  for (long k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * h;
    try {
      if (sampled_mode) {
        const Eigen::VectorXd f = pot.fitness(p);
        fired.clear();
        switch (cfg.trigger.mode) {
          case TriggerMode::distributed:
            for (int i = 0; i < n; ++i)
              if (g.degree(i) >= 1 &&
                  check_distributed(s.f_hat[i] - f[i], f[i], theta[i]))
                fired.push_back(i);
            break;
          case TriggerMode::centralized:
            if (check_centralized(s.f_hat - f, f, *cfg.trigger.gamma))
              for (int i = 0; i < n; ++i)
                if (g.degree(i) >= 1) fired.push_back(i);
            break;
          case TriggerMode::constant:
            for (int i = 0; i < n; ++i)
              if (g.degree(i) >= 1 && std::abs(s.f_hat[i] - f[i]) > *cfg.trigger.e_T)
                fired.push_back(i);
            break;
          case TriggerMode::none:
            break;
        }
        for (int i : fired) {
          s.broadcast(i, f[i], p[i], t);
          res.events.push_back({t, i, f[i], p[i]});
        }
        if (!fired.empty() && cfg.trigger.mode == TriggerMode::distributed &&
            cfg.trigger.lambda2_mode == Lambda2Mode::recompute)
          refresh_thresholds();
      }

      if (sampled_mode) {
        clamp_count += guarded_rk4_step(
            [&](const Eigen::VectorXd& q) { return triggered_field(g, pot, q, s); }, p, h,
            components);
      } else {
        clamp_count += guarded_rk4_step(
            [&](const Eigen::VectorXd& q) { return distributed_replicator_field(g, pot, q); },
            p, h, components);
      }
    } catch (const numerical_error& e) {
      res.summary = Summary{};
      throw simulation_aborted(std::string(e.what()) + " at t = " + std::to_string(t),
                               std::move(res));
    } catch (const state_error& e) {
      // mid-run simplex violations are numerical degradation, not bad input
      res.summary = Summary{};
      throw simulation_aborted(std::string(e.what()) + " at t = " + std::to_string(t),
                               std::move(res));
    }

    if ((k + 1) % stride == 0 || k + 1 == steps)
      record_sample(k + 1 == steps ? cfg.integrator.T : static_cast<double>(k + 1) * h, p);
  }

  // summary
  Summary& sum = res.summary;
  sum.p_final = p;
  sum.f_final = pot.fitness(p);
  sum.consensus_residual = sum.f_final.maxCoeff() - sum.f_final.minCoeff();
  sum.conservation_error = std::abs(p.sum() - pot.total());
  sum.trigger_count.assign(static_cast<size_t>(n), 0);
  std::vector<double> last_t(static_cast<size_t>(n), 0.0);
  sum.min_interevent.assign(static_cast<size_t>(n),
                            std::numeric_limits<double>::infinity());
  for (const auto& ev : res.events) {
    const auto i = static_cast<size_t>(ev.agent);
    if (sum.trigger_count[i] > 0)
      sum.min_interevent[i] = std::min(sum.min_interevent[i], ev.t - last_t[i]);
    last_t[i] = ev.t;
    ++sum.trigger_count[i];
  }
  sum.clamp_count = clamp_count;
  sum.feasibility_lost = feasibility_lost;
  if (cfg.trigger.mode == TriggerMode::distributed) {
    Eigen::VectorXd lambda2_per_agent = Eigen::VectorXd::Zero(n);
    for (const auto& members : components) {
      if (members.size() < 2) continue;
      const double l2 = detail::component_fiedler(g, cfg.initial, members);
      for (int i : members) lambda2_per_agent[i] = l2;
    }
    if (!g.edges().empty())
      sum.zeno_bounds = zeno_bounds(g, pot, {cfg.trigger.rho, cfg.trigger.a},
                                    lambda2_per_agent, cfg.trigger.q);
  } else if (cfg.trigger.mode == TriggerMode::centralized && !g.edges().empty()) {
    sum.zeno_bounds = zeno_bounds_centralized(
        g, pot,
        CentralizedRuleParams{*cfg.trigger.gamma,
                              cfg.trigger.phi.value_or(1.0 / std::sqrt(*cfg.trigger.gamma))});
  }
  if (components.size() == 1) {
    const KktSolution star = kkt_allocate(pot);
    sum.oracle_gap = (p - star.p).cwiseAbs().maxCoeff();
  }
  return res;
}

inline Summary summarize(const RunResult& result) {
  if (result.trajectory.empty())
    throw std::invalid_argument("summarize: empty trajectory");
  return result.summary;
}

namespace detail {

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    // non-finite entries serialize as null
    if (std::isfinite(v[i]))
      arr.push_back(v[i]);
    else
      arr.push_back(nullptr);
  }
  return arr;
}

}  // namespace detail

inline nlohmann::json summary_to_json(const Summary& sum) {
  nlohmann::json j;
  j["p_final"] = detail::vector_to_json(sum.p_final);
  j["f_final"] = detail::vector_to_json(sum.f_final);
  j["consensus_residual"] = sum.consensus_residual;
  j["conservation_error"] = sum.conservation_error;
  j["trigger_count"] = sum.trigger_count;
  nlohmann::json inter = nlohmann::json::array();
  for (double v : sum.min_interevent) {
    if (std::isfinite(v))
      inter.push_back(v);
    else
      inter.push_back(nullptr);
  }
  j["min_interevent"] = inter;
  if (sum.zeno_bounds) {
    nlohmann::json z;
    z["tau"] = sum.zeno_bounds->tau;
    z["tau_i"] = detail::vector_to_json(sum.zeno_bounds->tau_i);
    z["beta_i"] = detail::vector_to_json(sum.zeno_bounds->beta_i);
    z["q_i"] = detail::vector_to_json(sum.zeno_bounds->q_i);
    z["pi_norm"] = sum.zeno_bounds->pi_norm;
    z["eta"] = sum.zeno_bounds->eta;
    j["zeno_bounds"] = z;
  } else {
    j["zeno_bounds"] = nullptr;
  }
  j["clamp_count"] = sum.clamp_count;
  j["feasibility_lost"] = sum.feasibility_lost;
  if (sum.oracle_gap)
    j["oracle_gap"] = *sum.oracle_gap;
  else
    j["oracle_gap"] = nullptr;
  return j;
}

/// Write trajectory.csv, events.csv and summary.json into `directory`.
/// Output is byte-identical across repeated runs of the same config.
inline std::vector<std::filesystem::path> write_outputs(
    const RunResult& result, const std::filesystem::path& directory) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw io_error("cannot create output directory " + directory.string());

  const auto open = [](const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open " + path.string() + " for writing");
    return out;
  };

  const fs::path traj_path = directory / "trajectory.csv";
  {
    auto out = open(traj_path);
    const auto n = result.trajectory.empty() ? 0 : result.trajectory.front().p.size();
    out << "t";
    for (Eigen::Index i = 0; i < n; ++i) out << ",p_" << i;
    for (Eigen::Index i = 0; i < n; ++i) out << ",f_" << i;
    out << ",V,S\n";
    for (const auto& sample : result.trajectory) {
      out << detail::format_double(sample.t);
      for (Eigen::Index i = 0; i < n; ++i) out << ',' << detail::format_double(sample.p[i]);
      for (Eigen::Index i = 0; i < n; ++i) out << ',' << detail::format_double(sample.f[i]);
      out << ',' << detail::format_double(sample.V) << ',' << detail::format_double(sample.S)
          << '\n';
    }
  }

  const fs::path events_path = directory / "events.csv";
  {
    auto out = open(events_path);
    out << "t,agent,f_hat,p_hat\n";
    for (const auto& ev : result.events)
      out << detail::format_double(ev.t) << ',' << ev.agent << ','
          << detail::format_double(ev.f_hat) << ',' << detail::format_double(ev.p_hat)
          << '\n';
  }

  const fs::path summary_path = directory / "summary.json";
  {
    auto out = open(summary_path);
    out << summary_to_json(result.summary).dump(2) << '\n';
  }
  return {traj_path, events_path, summary_path};
}

}  // namespace popalloc
