#pragma once

// Batch scenario driver behind the arealaw command-line tool. A scenario is
// parsed from JSON, run, and rendered to in-memory files; writing them out is
// a separate step so the pipeline can be tested without touching disk.

#include "arealaw/divisibility.hpp"
#include "arealaw/dynamics.hpp"
#include "arealaw/entropy.hpp"
#include "arealaw/model.hpp"
#include "arealaw/random.hpp"
#include "arealaw/spin_boson.hpp"
#include "arealaw/zassenhaus.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace arealaw::runner {

using json = nlohmann::json;

enum ExitStatus : int { kOk = 0, kValidation = 2, kNumerical = 3 };

/// Bad config or parameters; maps to exit status 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Command { simulate, bound, divisibility, spinboson, zassenhaus };

inline std::string_view to_string(Command c) {
  switch (c) {
    case Command::simulate: return "simulate";
    case Command::bound: return "bound";
    case Command::divisibility: return "divisibility";
    case Command::spinboson: return "spinboson";
    case Command::zassenhaus: return "zassenhaus";
  }
  return "?";
}

/// Command-line values that take precedence over the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> t_max;
  std::optional<std::size_t> steps;
  std::optional<double> c;
  // spin-boson
  std::optional<double> omega, beta, eta, j;
  std::optional<int> nmax;
  // bound ensemble
  std::optional<int> count;
  // zassenhaus
  std::optional<int> max_order;
};

struct OutputFile {
  std::string name;
  std::string content;
};

struct RunResult {
  std::vector<OutputFile> files;
};

// ---- formatting ---------------------------------------------------------------

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v == 0.0 ? 0.0 : v);  // no "-0"
  return buf;
}

inline std::string fmt(bool b) { return b ? "true" : "false"; }

/// Ordered key = value lines.
class Report {
 public:
  template <class T>
  void add(const std::string& key, const T& value) {
    std::ostringstream os;
    if constexpr (std::is_same_v<T, double> || std::is_same_v<T, bool>) {
      os << fmt(value);
    } else {
      os << value;
    }
    lines_.push_back(key + " = " + os.str());
  }
  void add(const std::string& key, const std::optional<double>& v) {
    add(key, v ? fmt(*v) : std::string("undefined"));
  }
  std::string str() const {
    std::string out;
    for (const std::string& l : lines_) out += l + "\n";
    return out;
  }

 private:
  std::vector<std::string> lines_;
};

// ---- config parsing -----------------------------------------------------------

namespace detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw ValidationError("config field '" + path + "': " + what);
}

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline const json* find(const json& j, const char* key) {
  if (!j.is_object()) return nullptr;
  const auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

inline std::optional<double> opt_number(const json& j, const char* key, const std::string& path) {
  const json* v = find(j, key);
  if (!v) return std::nullopt;
  return number(*v, join(path, key));
}

inline std::optional<long long> opt_integer(const json& j, const char* key, const std::string& path) {
  const json* v = find(j, key);
  if (!v) return std::nullopt;
  if (!v->is_number_integer()) fail(join(path, key), "expected an integer");
  return v->get<long long>();
}

inline Index dimension(const json& j, const char* key, const std::string& path) {
  const auto v = opt_integer(j, key, path);
  if (!v) fail(join(path, key), "missing");
  if (*v < 1 || *v > 64) fail(join(path, key), "dimension must be in [1, 64]");
  return static_cast<Index>(*v);
}

/// Dense n x n matrix from [[row, col, re, im], ...] (im optional). An entry
/// whose mirror (col, row) is not listed gets the conjugate mirror, so a
/// Hermitian block can be written as its upper triangle.
inline ComplexMatrix matrix(const json& j, Index n, const std::string& path) {
  if (!j.is_array()) fail(path, "expected a list of [row, col, re, im] entries");
  ComplexMatrix m = ComplexMatrix::Zero(n, n);
  std::set<std::pair<Index, Index>> given;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string p = path + "[" + std::to_string(k) + "]";
    const json& e = j[k];
    if (!e.is_array() || e.size() < 3 || e.size() > 4) fail(p, "expected [row, col, re] or [row, col, re, im]");
    if (!e[0].is_number_integer() || !e[1].is_number_integer()) fail(p, "row and col must be integers");
    const long long r = e[0].get<long long>(), c = e[1].get<long long>();
    if (r < 0 || r >= n || c < 0 || c >= n) {
      fail(p, "index (" + std::to_string(r) + ", " + std::to_string(c) + ") outside " +
                  std::to_string(n) + "x" + std::to_string(n));
    }
    if (!given.insert({r, c}).second) fail(p, "duplicate entry");
    m(r, c) = Complex(number(e[2], p + "[2]"), e.size() == 4 ? number(e[3], p + "[3]") : 0.0);
  }
  for (const auto& [r, c] : given) {
    if (!given.count({c, r})) m(c, r) = std::conj(m(r, c));
  }
  return m;
}

/// Vector from [[index, re, im], ...] (im optional).
inline ComplexVector vector(const json& j, Index n, const std::string& path) {
  if (!j.is_array()) fail(path, "expected a list of [index, re, im] entries");
  ComplexVector v = ComplexVector::Zero(n);
  std::set<Index> given;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string p = path + "[" + std::to_string(k) + "]";
    const json& e = j[k];
    if (!e.is_array() || e.size() < 2 || e.size() > 3 || !e[0].is_number_integer()) {
      fail(p, "expected [index, re] or [index, re, im]");
    }
    const long long i = e[0].get<long long>();
    if (i < 0 || i >= n) fail(p, "index " + std::to_string(i) + " outside [0, " + std::to_string(n) + ")");
    if (!given.insert(i).second) fail(p, "duplicate entry");
    v(i) = Complex(number(e[1], p + "[1]"), e.size() == 3 ? number(e[2], p + "[2]") : 0.0);
  }
  return v;
}

inline ComplexVector maybe_normalized(ComplexVector v, bool normalize, const std::string& path) {
  if (!normalize) return v;
  const double nrm = v.norm();
  if (!(nrm > 0.0)) fail(path, "zero vector cannot be normalized");
  return v / nrm;
}

}  // namespace detail

inline const std::vector<std::string>& scenario_kinds() {
  static const std::vector<std::string> kinds{"generic-bipartite", "spin-boson", "divisibility",
                                              "zassenhaus-scan", "bound-ensemble"};
  return kinds;
}

/// Parsed scenario: the validated config document plus the resolved common fields.
struct Scenario {
  std::string kind;
  json doc = json::object();
  double t_max = 5.0;
  std::size_t steps = 101;
  std::optional<std::uint64_t> seed;
  double c = 2.0;
  Overrides overrides;

  TimeGrid grid() const { return TimeGrid::uniform(t_max, steps); }

  std::uint64_t require_seed(const std::string& why) const {
    if (!seed) throw ValidationError("seed required: " + why + " (set \"seed\" or --seed)");
    return *seed;
  }
};

/// Line number of a byte offset, for parse diagnostics.
inline std::size_t line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t k = 0; k < std::min(byte, text.size()); ++k) line += text[k] == '\n';
  return line;
}

inline json parse_config_text(const std::string& text, const std::string& origin = "config") {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::ostringstream os;
    os << origin << ": line " << line_of(text, e.byte == 0 ? 0 : e.byte - 1)
       << ": JSON parse error: " << e.what();
    throw ValidationError(os.str());
  }
}

inline json load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

inline std::string default_kind(Command cmd) {
  switch (cmd) {
    case Command::simulate: return "generic-bipartite";
    case Command::bound: return "bound-ensemble";
    case Command::divisibility: return "divisibility";
    case Command::spinboson: return "spin-boson";
    case Command::zassenhaus: return "zassenhaus-scan";
  }
  return "";
}

inline bool kind_allowed(Command cmd, const std::string& kind) {
  switch (cmd) {
    case Command::simulate: return kind == "generic-bipartite" || kind == "divisibility";
    case Command::bound: return kind == "bound-ensemble" || kind == "generic-bipartite";
    case Command::divisibility: return kind == "divisibility" || kind == "generic-bipartite";
    case Command::spinboson: return kind == "spin-boson";
    case Command::zassenhaus: return kind == "zassenhaus-scan";
  }
  return false;
}

inline Scenario make_scenario(Command cmd, const json& doc, const Overrides& ov) {
  using namespace detail;
  if (!doc.is_object()) fail("", "top level must be an object");
  Scenario sc;
  sc.doc = doc;
  sc.overrides = ov;
  if (const json* k = find(doc, "kind")) {
    if (!k->is_string()) fail("kind", "expected a string");
    sc.kind = k->get<std::string>();
    bool known = false;
    for (const std::string& s : scenario_kinds()) known = known || s == sc.kind;
    if (!known) fail("kind", "unknown scenario kind '" + sc.kind + "'");
  } else {
    sc.kind = default_kind(cmd);
  }
  if (!kind_allowed(cmd, sc.kind)) {
    throw ValidationError("scenario kind '" + sc.kind + "' cannot run under '" +
                          std::string(to_string(cmd)) + "'");
  }
  if (const json* g = find(doc, "grid")) {
    if (auto v = opt_number(*g, "t_max", "grid")) sc.t_max = *v;
    if (auto v = opt_integer(*g, "steps", "grid")) {
      if (*v < 0) fail("grid.steps", "must be >= 2");
      sc.steps = static_cast<std::size_t>(*v);
    }
  }
  if (auto v = opt_integer(doc, "seed", "")) {
    if (*v < 0) fail("seed", "must be non-negative");
    sc.seed = static_cast<std::uint64_t>(*v);
  }
  if (auto v = opt_number(doc, "c", "")) sc.c = *v;
  if (ov.t_max) sc.t_max = *ov.t_max;
  if (ov.steps) sc.steps = *ov.steps;
  if (ov.seed) sc.seed = ov.seed;
  if (ov.c) sc.c = *ov.c;
  if (!(sc.t_max > 0.0) || !std::isfinite(sc.t_max)) fail("grid.t_max", "must be > 0");
  if (sc.steps < 2) fail("grid.steps", "must be >= 2");
  if (sc.steps > 100000) fail("grid.steps", "must be <= 100000");
  if (!(sc.c > 0.0)) fail("c", "must be > 0");
  return sc;
}

// ---- model / state construction -----------------------------------------------

/// Model from the "model" section; `rng` is consumed when the model is random.
inline BipartiteSystem build_system(const Scenario& sc, std::optional<Rng>& rng) {
  using namespace detail;
  const json* m = find(sc.doc, "model");
  if (!m || (m->is_object() && find(*m, "random"))) {
    const json empty = json::object();
    const json& r = m ? (*m)["random"] : empty;
    const std::string path = m ? "model.random" : "model";
    if (!rng) rng.emplace(sc.require_seed("random model"));
    const Index da = find(r, "dim_a") ? dimension(r, "dim_a", path) : 2;
    const Index de = find(r, "dim_e") ? dimension(r, "dim_e", path) : 2;
    const double coupling = opt_number(r, "coupling", path).value_or(1.0);
    bool e_comm = false;
    if (const json* e = find(r, "e_commuting")) {
      if (!e->is_boolean()) fail(join(path, "e_commuting"), "expected true or false");
      e_comm = e->get<bool>();
    }
    return e_comm ? e_commuting_system(da, de, *rng) : random_system(da, de, *rng, coupling);
  }
  if (!m->is_object()) fail("model", "expected an object");
  BipartiteSystem s;
  s.dim_a = dimension(*m, "dim_a", "model");
  s.dim_e = dimension(*m, "dim_e", "model");
  if (s.dim() > 256) fail("model", "dim_a * dim_e must be <= 256");
  auto block = [&](const char* key, Index n) {
    const json* b = find(*m, key);
    return b ? matrix(*b, n, join("model", key)) : ComplexMatrix(ComplexMatrix::Zero(n, n));
  };
  s.h_a = block("h_a", s.dim_a);
  s.h_e = block("h_e", s.dim_e);
  s.h_ae = block("h_ae", s.dim());
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    fail("model", e.what());
  }
  return s;
}

/// Initial state from the "initial" section. Without one the start is |0>|0>.
inline InitialState build_initial(const Scenario& sc, const BipartiteSystem& s,
                                  std::optional<Rng>& rng) {
  using namespace detail;
  const json* in = find(sc.doc, "initial");
  InitialState init;
  if (!in) {
    ComplexVector a = ComplexVector::Zero(s.dim());
    a(0) = 1.0;
    init = InitialState::pure(a, s.dim_a, s.dim_e);
  } else {
    if (!in->is_object()) fail("initial", "expected an object");
    bool normalize = false;
    if (const json* nz = find(*in, "normalize")) {
      if (!nz->is_boolean()) fail("initial.normalize", "expected true or false");
      normalize = nz->get<bool>();
    }
    const json* rp = find(*in, "random_product");
    if (rp && rp->is_boolean() && rp->get<bool>()) {
      if (!rng) rng.emplace(sc.require_seed("random initial state"));
      init = random_product_state(s.dim_a, s.dim_e, *rng);
    } else if (const json* a = find(*in, "amplitudes")) {
      init = InitialState::pure(
          maybe_normalized(vector(*a, s.dim(), "initial.amplitudes"), normalize, "initial.amplitudes"),
          s.dim_a, s.dim_e);
    } else {
      const json* sys = find(*in, "system");
      if (!sys) fail("initial", "needs 'amplitudes', 'system' (+ 'env' or 'env_weights') or 'random_product'");
      const ComplexVector c =
          maybe_normalized(vector(*sys, s.dim_a, "initial.system"), normalize, "initial.system");
      if (const json* d = find(*in, "env_weights")) {
        init = InitialState::env_weighted(c, matrix(*d, s.dim_e, "initial.env_weights"));
      } else {
        const json* e = find(*in, "env");
        if (!e) fail("initial", "'system' needs 'env' or 'env_weights'");
        init = InitialState::product(
            c, maybe_normalized(vector(*e, s.dim_e, "initial.env"), normalize, "initial.env"));
      }
    }
  }
  try {
    init.validate(s.dim_a, s.dim_e);
  } catch (const std::invalid_argument& e) {
    fail("initial", e.what());
  }
  return init;
}

/// Environment weights d for the supermatrix: explicit "env_weights" at top
/// level, else those of the initial state, else the maximally mixed state.
inline ComplexMatrix env_weights_for(const Scenario& sc, const BipartiteSystem& s,
                                     const InitialState& init) {
  using namespace detail;
  if (const json* d = find(sc.doc, "env_weights")) {
    const ComplexMatrix m = matrix(*d, s.dim_e, "env_weights");
    try {
      InitialState::validate_env_weights(m, s.dim_e);
    } catch (const std::invalid_argument& e) {
      fail("env_weights", e.what());
    }
    return m;
  }
  if (init.kind == InitialState::Kind::env_weighted) return init.env_weights;
  if (const auto f = init.as_product()) return f->second * f->second.adjoint();
  return identity(s.dim_e) / static_cast<double>(s.dim_e);
}

// ---- traces -----------------------------------------------------------------

inline constexpr const char* kTraceHeader =
    "t,S_nats,S_bits,purity_A,sigma11,sigma22,bound_rhs,rate_at_zero\n";

/// Raises NumericalError when a reduced state leaves the physical set.
inline void check_physical(const DensityMatrix& rho, double t) {
  const DensityMatrix::Diagnostics d = rho.diagnostics();
  if (d.hermitian_dev > 1e-10 || d.trace_dev > 1e-10 || d.min_eigenvalue < -1e-10) {
    std::ostringstream os;
    os << "reduced state at t=" << fmt(t) << " violates invariants (hermitian dev "
       << fmt(d.hermitian_dev) << ", trace dev " << fmt(d.trace_dev) << ", min eigenvalue "
       << fmt(d.min_eigenvalue) << ")";
    throw NumericalError(os.str());
  }
}

struct TraceSummary {
  double s_min = 0.0, s_max = 0.0, s_first = 0.0, max_deviation = 0.0;
};

inline std::string trace_csv(const std::vector<double>& times,
                             const std::vector<DensityMatrix>& states, double bound_rhs,
                             double rate, TraceSummary* summary = nullptr) {
  std::string out = kTraceHeader;
  TraceSummary sum;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const DensityMatrix& rho = states[k];
    check_physical(rho, times[k]);
    const double s = von_neumann_entropy(rho);
    double lo, hi;
    if (rho.mat.rows() == 2) {
      const TwoLevelSpectrum sp = two_level_spectrum(rho);
      lo = sp.sigma11;
      hi = sp.sigma22;
    } else {
      const RealVector ev = hermitian_eig(rho.mat, 1e-10).values;
      lo = ev.minCoeff();
      hi = ev.maxCoeff();
    }
    if (k == 0) sum.s_first = sum.s_min = sum.s_max = s;
    sum.s_min = std::min(sum.s_min, s);
    sum.s_max = std::max(sum.s_max, s);
    sum.max_deviation = std::max(sum.max_deviation, std::abs(s - sum.s_first));
    out += fmt(times[k]) + "," + fmt(s) + "," + fmt(s / std::numbers::ln2) + "," +
           fmt(rho.purity()) + "," + fmt(lo) + "," + fmt(hi) + "," + fmt(bound_rhs) + "," +
           fmt(rate) + "\n";
  }
  if (summary) *summary = sum;
  return out;
}

inline void add_kitaev(Report& r, const KitaevReport& k, const RateEstimate& rate) {
  r.add("rate_at_zero", k.rate);
  r.add("rate_error_estimate", rate.error_estimate);
  r.add("rate_converged", rate.converged);
  r.add("coupling_norm", k.coupling_norm);
  r.add("c", k.c);
  r.add("delta_dim", k.delta_dim);
  r.add("bound_rhs", k.bound_rhs);
  r.add("ratio", k.ratio);
  r.add("bound_satisfied", k.satisfied);
}

inline std::string divisibility_csv(const DivisibilityReport& d) {
  std::string out = "split_time,residual,verdict\n";
  for (std::size_t k = 0; k < d.split_times.size(); ++k) {
    const bool ok = d.split_residuals[k] <= kDivisibilityTol;
    out += fmt(d.split_times[k]) + "," + fmt(d.split_residuals[k]) + "," +
           std::string(to_string(ok ? Verdict::divisible : Verdict::non_divisible)) + "\n";
  }
  return out;
}

inline std::vector<double> splits_for(const Scenario& sc, double t) {
  using namespace detail;
  const json* sp = find(sc.doc, "splits");
  if (!sp) return default_splits(t);
  if (!sp->is_array() || sp->empty()) fail("splits", "expected a non-empty list of times");
  std::vector<double> out;
  for (std::size_t k = 0; k < sp->size(); ++k) {
    const std::string p = "splits[" + std::to_string(k) + "]";
    const double s = number((*sp)[k], p);
    if (!(s > 0.0 && s < t)) fail(p, "split " + fmt(s) + " outside (0, " + fmt(t) + ")");
    out.push_back(s);
  }
  return out;
}

// ---- scenario runners -----------------------------------------------------------

inline RunResult run_simulate(const Scenario& sc) {
  std::optional<Rng> rng;
  if (sc.seed) rng.emplace(*sc.seed);
  const BipartiteSystem s = build_system(sc, rng);
  const InitialState init = build_initial(sc, s, rng);
  const TimeGrid grid = sc.grid();

  const std::vector<DensityMatrix> states = sweep(s, init, grid);
  const RateEstimate rate = entanglement_rate_at_zero(s, init);
  const KitaevReport k = kitaev_bound_check(rate.value, operator_norm(s.h_ae), s.dim_a, s.dim_e, sc.c);
  TraceSummary ts;
  RunResult out;
  out.files.push_back({"trace.csv", trace_csv(grid.times, states, k.bound_rhs, k.rate, &ts)});

  const CommutatorReport cls = commutator_classification(s);
  const DivisibilityReport div =
      divisibility_residual(s, env_weights_for(sc, s, init), grid.times.back(),
                            splits_for(sc, grid.times.back()));
  Report r;
  r.add("command", std::string("simulate"));
  r.add("kind", sc.kind);
  r.add("dim_a", s.dim_a);
  r.add("dim_e", s.dim_e);
  r.add("t_max", sc.t_max);
  r.add("steps", sc.steps);
  r.add("seed", sc.seed ? std::to_string(*sc.seed) : std::string("none"));
  r.add("commutator_class", std::string(to_string(cls.label)));
  r.add("norm_comm_a", cls.norm_a_comm);
  r.add("norm_comm_e", cls.norm_e_comm);
  add_kitaev(r, k, rate);
  r.add("entropy_min", ts.s_min);
  r.add("entropy_max", ts.s_max);
  r.add("entropy_max_deviation", ts.max_deviation);
  r.add("entropy_constant", ts.max_deviation <= 1e-8);
  r.add("divisibility_t", grid.times.back());
  r.add("divisibility_residual", div.residual);
  r.add("divisibility_verdict", std::string(to_string(div.verdict)));
  r.add("status", std::string("ok"));
  out.files.push_back({"report.txt", r.str()});
  return out;
}

inline RunResult run_divisibility(const Scenario& sc) {
  std::optional<Rng> rng;
  if (sc.seed) rng.emplace(*sc.seed);
  const BipartiteSystem s = build_system(sc, rng);
  const InitialState init = build_initial(sc, s, rng);
  const double t = sc.t_max;
  const ComplexMatrix d = env_weights_for(sc, s, init);
  const DivisibilityReport div = divisibility_residual(s, d, t, splits_for(sc, t));

  // The reduced state from the map must agree with the partial trace.
  const SuperMatrix c = supermatrix(s, d, t, 0.0);
  const ComplexVector c0 = [&] {
    if (init.kind == InitialState::Kind::env_weighted) return init.system;
    if (const auto f = init.as_product()) return f->first;
    ComplexVector v = ComplexVector::Zero(s.dim_a);
    v(0) = 1.0;
    return v;
  }();
  const DensityMatrix via_map{c.apply(c0), s.dim_a, 1};
  check_physical(via_map, t);
  const DensityMatrix via_trace = rho_reduced(s, InitialState::env_weighted(c0, d), t);
  const double oracle_gap = max_abs(via_map.mat - via_trace.mat);
  const MemoryTerms mem = memory_terms(s, init, t, 0);

  RunResult out;
  out.files.push_back({"divisibility.csv", divisibility_csv(div)});
  Report r;
  r.add("command", std::string("divisibility"));
  r.add("kind", sc.kind);
  r.add("dim_a", s.dim_a);
  r.add("dim_e", s.dim_e);
  r.add("t", t);
  r.add("condition_class", std::string(to_string(div.condition_class)));
  r.add("residual", div.residual);
  r.add("tolerance", kDivisibilityTol);
  r.add("verdict", std::string(to_string(div.verdict)));
  r.add("map_vs_partial_trace", oracle_gap);
  r.add("memory_gamma", mem.gamma);
  r.add("memory_master_residual", mem.master_residual);
  double cross = 0.0;
  for (Index b = 0; b < s.dim_e; ++b) {
    cross = std::max(cross, std::max(max_abs(mem.omega_gamma_beta[b]), max_abs(mem.omega_beta_gamma[b])));
  }
  r.add("memory_cross_term_max", cross);
  r.add("status", std::string("ok"));
  out.files.push_back({"report.txt", r.str()});
  if (oracle_gap > 1e-10) {
    throw NumericalError("supermatrix and partial-trace reduced states differ by " + fmt(oracle_gap));
  }
  return out;
}

inline RunResult run_bound(const Scenario& sc) {
  using namespace detail;
  if (sc.kind == "generic-bipartite") {
    std::optional<Rng> rng;
    if (sc.seed) rng.emplace(*sc.seed);
    const BipartiteSystem s = build_system(sc, rng);
    const InitialState init = build_initial(sc, s, rng);
    const RateEstimate rate = entanglement_rate_at_zero(s, init);
    const KitaevReport k = kitaev_bound_check(rate.value, operator_norm(s.h_ae), s.dim_a, s.dim_e, sc.c);
    Report r;
    r.add("command", std::string("bound"));
    r.add("kind", sc.kind);
    r.add("dim_a", s.dim_a);
    r.add("dim_e", s.dim_e);
    add_kitaev(r, k, rate);
    r.add("status", std::string("ok"));
    return {{{"report.txt", r.str()}}};
  }

  const json empty = json::object();
  const json* e = find(sc.doc, "ensemble");
  const json& ens = e ? *e : empty;
  const Index da = find(ens, "dim_a") ? dimension(ens, "dim_a", "ensemble") : 2;
  const Index de = find(ens, "dim_e") ? dimension(ens, "dim_e", "ensemble") : 2;
  const double coupling = opt_number(ens, "coupling", "ensemble").value_or(1.0);
  long long count = opt_integer(ens, "count", "ensemble").value_or(100);
  if (sc.overrides.count) count = *sc.overrides.count;
  if (count < 1 || count > 100000) fail("ensemble.count", "must be in [1, 100000]");
  std::string start = "entangled";
  if (const json* st = find(ens, "initial")) {
    if (!st->is_string() || (st->get<std::string>() != "entangled" && st->get<std::string>() != "product")) {
      fail("ensemble.initial", "expected \"entangled\" or \"product\"");
    }
    start = st->get<std::string>();
  }
  const std::uint64_t base = sc.require_seed("bound ensemble");

  std::string csv = "seed,rate,norm_H_AE,ratio,satisfied\n";
  double max_ratio = -std::numeric_limits<double>::infinity();
  bool all_ok = true, all_finite = true;
  long long unconverged = 0;
  for (long long m = 0; m < count; ++m) {
    const std::uint64_t seed = base + static_cast<std::uint64_t>(m);
    Rng rng(seed);
    const BipartiteSystem s = random_system(da, de, rng, coupling);
    const InitialState init = start == "product"
                                  ? random_product_state(da, de, rng)
                                  : InitialState::pure(random_unit_vector(da * de, rng), da, de);
    const RateEstimate rate = entanglement_rate_at_zero(s, init);
    const KitaevReport k = kitaev_bound_check(rate.value, operator_norm(s.h_ae), da, de, sc.c);
    const double ratio = k.ratio.value_or(std::nan(""));
    all_finite = all_finite && std::isfinite(rate.value) && std::isfinite(k.coupling_norm) &&
                 (!k.ratio || std::isfinite(ratio));
    if (k.ratio) max_ratio = std::max(max_ratio, ratio);
    all_ok = all_ok && k.satisfied;
    unconverged += !rate.converged;
    csv += std::to_string(seed) + "," + fmt(k.rate) + "," + fmt(k.coupling_norm) + "," +
           (k.ratio ? fmt(ratio) : std::string("undefined")) + "," + fmt(k.satisfied) + "\n";
  }
  Report r;
  r.add("command", std::string("bound"));
  r.add("kind", sc.kind);
  r.add("dim_a", da);
  r.add("dim_e", de);
  r.add("coupling_scale", coupling);
  r.add("count", count);
  r.add("initial", start);
  r.add("seed_first", base);
  r.add("c", sc.c);
  r.add("max_ratio", std::isfinite(max_ratio) ? std::optional<double>(max_ratio) : std::nullopt);
  r.add("all_satisfied", all_ok);
  r.add("all_finite", all_finite);
  r.add("unconverged_rates", unconverged);
  r.add("status", std::string(all_finite ? "ok" : "non-finite values"));
  if (!all_finite) throw NumericalError("bound ensemble produced non-finite values");
  return {{{"ensemble.csv", csv}, {"report.txt", r.str()}}};
}

inline spin_boson::Params spin_boson_params(const Scenario& sc) {
  using namespace detail;
  spin_boson::Params p;
  if (const json* sb = find(sc.doc, "spin_boson")) {
    if (!sb->is_object()) fail("spin_boson", "expected an object");
    if (auto v = opt_number(*sb, "omega", "spin_boson")) p.omega = *v;
    if (auto v = opt_number(*sb, "beta", "spin_boson")) p.beta = *v;
    if (auto v = opt_number(*sb, "eta", "spin_boson")) p.eta = *v;
    if (auto v = opt_number(*sb, "j", "spin_boson")) p.j = *v;
    if (auto v = opt_integer(*sb, "nmax", "spin_boson")) {
      if (*v < 1 || *v > spin_boson::kMaxFactorialArg) fail("spin_boson.nmax", "must be in [1, 20]");
      p.nmax = static_cast<int>(*v);
    }
  }
  const Overrides& o = sc.overrides;
  if (o.omega) p.omega = *o.omega;
  if (o.beta) p.beta = *o.beta;
  if (o.eta) p.eta = *o.eta;
  if (o.j) p.j = *o.j;
  if (o.nmax) p.nmax = *o.nmax;
  if (p.nmax > spin_boson::kMaxFactorialArg) fail("spin_boson.nmax", "must be in [1, 20]");
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    fail("spin_boson", e.what());
  }
  return p;
}

inline RunResult run_spinboson(const Scenario& sc) {
  const spin_boson::Params p = spin_boson_params(sc);
  const TimeGrid grid = sc.grid();
  spin_boson::CrossCheckReport cc;
  try {
    cc = spin_boson::cross_check(p, grid);
  } catch (const spin_boson::TruncationError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  const BipartiteSystem s = spin_boson::build_model(p);
  const std::vector<DensityMatrix> states = sweep(s, spin_boson::entangled_start(p), grid);
  const KitaevReport oracle_k =
      kitaev_bound_check(cc.oracle_rate.value, operator_norm(s.h_ae), s.dim_a, s.dim_e, sc.c);
  const KitaevReport closed_k =
      kitaev_bound_check(cc.closed_rate, oracle_k.coupling_norm, s.dim_a, s.dim_e, sc.c);

  RunResult out;
  TraceSummary ts;
  out.files.push_back({"trace.csv", trace_csv(grid.times, states, oracle_k.bound_rhs, oracle_k.rate, &ts)});

  std::string table =
      "t,omega_closed,omega_series_re,omega_series_im,omega_normalized,oracle_coherence,"
      "ratio_raw,ratio_normalized,S_raw,S_normalized,S_oracle,S_oracle_product\n";
  for (const spin_boson::CrossRow& row : cc.rows) {
    table += fmt(row.t) + "," + fmt(row.omega_closed) + "," + fmt(row.omega_series.real()) + "," +
             fmt(row.omega_series.imag()) + "," + fmt(row.omega_normalized) + "," +
             fmt(std::abs(row.oracle_coherence)) + "," + fmt(row.ratio_raw) + "," +
             fmt(row.ratio_normalized) + "," + (row.s_raw ? fmt(*row.s_raw) : "undefined") + "," +
             fmt(row.s_normalized) + "," + fmt(row.s_oracle) + "," + fmt(row.s_oracle_product) + "\n";
  }
  out.files.push_back({"spinboson_ratio.csv", table});

  const spin_boson::CrossRow& first = cc.rows.front();
  Report r;
  r.add("command", std::string("spinboson"));
  r.add("omega", p.omega);
  r.add("beta", p.beta);
  r.add("eta", p.eta);
  r.add("j", p.j);
  r.add("nmax", p.nmax);
  r.add("gamma_j", p.gamma());
  r.add("t_max", sc.t_max);
  r.add("steps", sc.steps);
  r.add("commutator_class", std::string(to_string(commutator_classification(s).label)));
  r.add("omega_e_closed_at_zero", first.omega_closed);
  r.add("oracle_coherence_at_zero", std::abs(first.oracle_coherence));
  r.add("factor_at_zero", cc.factor_at_zero);
  r.add("s_raw_at_zero", first.s_raw);
  r.add("s_normalized_at_zero", first.s_normalized);
  r.add("s_oracle_at_zero", first.s_oracle);
  r.add("cross_verdict", std::string(spin_boson::to_string(cc.verdict)));
  r.add("truncation_drift", cc.truncation_drift);
  r.add("closed_form_rate", cc.closed_rate);
  r.add("oracle_rate", cc.oracle_rate.value);
  r.add("coupling_norm", oracle_k.coupling_norm);
  r.add("bound_rhs", oracle_k.bound_rhs);
  r.add("closed_rate_below_bound", closed_k.satisfied);
  r.add("closed_rate_magnitude_below_bound", std::abs(cc.closed_rate) <= oracle_k.bound_rhs + 1e-12);
  r.add("oracle_rate_below_bound", oracle_k.satisfied);
  r.add("oracle_entropy_max_deviation", ts.max_deviation);
  r.add("note", cc.note);
  r.add("status", std::string("ok"));
  out.files.push_back({"report.txt", r.str()});
  return out;
}

inline RunResult run_zassenhaus(const Scenario& sc) {
  using namespace detail;
  const json empty = json::object();
  const json* z = find(sc.doc, "zassenhaus");
  const json& zs = z ? *z : empty;
  std::string generators = "random";
  if (const json* g = find(zs, "generators")) {
    if (!g->is_string()) fail("zassenhaus.generators", "expected \"random\", \"spin-boson\" or \"explicit\"");
    generators = g->get<std::string>();
  }
  ComplexMatrix a, b;
  if (generators == "random") {
    const Index n = find(zs, "dim") ? dimension(zs, "dim", "zassenhaus") : 4;
    Rng rng(sc.require_seed("random Zassenhaus generators"));
    a = -kI * random_hermitian(n, rng);
    b = -kI * random_hermitian(n, rng);
  } else if (generators == "spin-boson") {
    const BipartiteSystem s = spin_boson::build_model(spin_boson_params(sc));
    a = -kI * (kron(s.h_a, identity(s.dim_e)) + kron(identity(s.dim_a), s.h_e));
    b = -kI * s.h_ae;
  } else if (generators == "explicit") {
    const Index n = dimension(zs, "dim", "zassenhaus");
    const json* ja = find(zs, "a");
    const json* jb = find(zs, "b");
    if (!ja || !jb) fail("zassenhaus", "explicit generators need 'a' and 'b' (Hermitian, X = -i t a)");
    const ComplexMatrix ha = matrix(*ja, n, "zassenhaus.a"), hb = matrix(*jb, n, "zassenhaus.b");
    if (!is_hermitian(ha)) fail("zassenhaus.a", "must be Hermitian");
    if (!is_hermitian(hb)) fail("zassenhaus.b", "must be Hermitian");
    a = -kI * ha;
    b = -kI * hb;
  } else {
    fail("zassenhaus.generators", "unknown generator set '" + generators + "'");
  }

  double t_lo = opt_number(zs, "t_min", "zassenhaus").value_or(1e-3);
  double t_hi = opt_number(zs, "t_max", "zassenhaus").value_or(1e-1);
  long long points = opt_integer(zs, "points", "zassenhaus").value_or(8);
  if (sc.overrides.t_max) t_hi = *sc.overrides.t_max;
  if (sc.overrides.steps) points = static_cast<long long>(*sc.overrides.steps);
  if (!(t_lo > 0.0 && t_hi > t_lo)) fail("zassenhaus", "need 0 < t_min < t_max");
  if (points < 4 || points > 1000) fail("zassenhaus.points", "must be in [4, 1000]");
  std::vector<int> orders{1, 2, 3, 4};
  if (const json* o = find(zs, "orders")) {
    if (!o->is_array() || o->empty()) fail("zassenhaus.orders", "expected a non-empty list");
    orders.clear();
    for (std::size_t k = 0; k < o->size(); ++k) {
      const json& v = (*o)[k];
      if (!v.is_number_integer() || v.get<int>() < 1 || v.get<int>() > 8) {
        fail("zassenhaus.orders[" + std::to_string(k) + "]", "order must be an integer in [1, 8]");
      }
      orders.push_back(v.get<int>());
    }
  }
  if (sc.overrides.max_order) {
    if (*sc.overrides.max_order < 1 || *sc.overrides.max_order > 8) {
      throw ValidationError("--max-order must be in [1, 8]");
    }
    orders.clear();
    for (int k = 1; k <= *sc.overrides.max_order; ++k) orders.push_back(k);
  }
  const std::vector<double> ts = zassenhaus::log_spaced(t_lo, t_hi, static_cast<std::size_t>(points));

  std::string csv = "order,t,error\n";
  Report r;
  r.add("command", std::string("zassenhaus"));
  r.add("generators", generators);
  r.add("dim", a.rows());
  r.add("t_min", t_lo);
  r.add("t_max", t_hi);
  r.add("points", points);
  r.add("commutator_norm", operator_norm(commutator(a, b)));
  for (int order : orders) {
    const zassenhaus::OrderScan scan = zassenhaus::truncation_order_scan(a, b, order, ts);
    for (std::size_t k = 0; k < ts.size(); ++k) {
      csv += std::to_string(order) + "," + fmt(ts[k]) + "," + fmt(scan.errors[k]) + "\n";
    }
    const std::string key = "order_" + std::to_string(order);
    r.add(key + "_expected_slope", static_cast<double>(order + 1));
    r.add(key + "_degenerate", scan.degenerate);
    r.add(key + "_slope", scan.degenerate ? std::optional<double>() : std::optional<double>(scan.slope));
    r.add(key + "_slope_ok", !scan.degenerate && std::abs(scan.slope - (order + 1)) <= 0.3);
  }
  r.add("status", std::string("ok"));
  return {{{"zassenhaus.csv", csv}, {"report.txt", r.str()}}};
}

inline RunResult run(Command cmd, const Scenario& sc) {
  switch (cmd) {
    case Command::simulate: return run_simulate(sc);
    case Command::bound: return run_bound(sc);
    case Command::divisibility: return run_divisibility(sc);
    case Command::spinboson: return run_spinboson(sc);
    case Command::zassenhaus: return run_zassenhaus(sc);
  }
  throw ValidationError("unknown command");
}

// ---- output -----------------------------------------------------------------------

/// Write via a temporary sibling and rename, so a reader never sees a partial file.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << content;
    f.flush();
    if (!f) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline void write_outputs(const std::filesystem::path& dir, const RunResult& result) {
  std::filesystem::create_directories(dir);
  for (const OutputFile& f : result.files) write_atomic(dir / f.name, f.content);
}

/// Full pipeline with exit-status mapping. Diagnostics go to `err`.
inline int execute(Command cmd, const std::optional<std::string>& config_path,
                   const Overrides& ov, const std::filesystem::path& out_dir, std::ostream& err) {
  try {
    const json doc = config_path ? load_config_file(*config_path) : json::object();
    const Scenario sc = make_scenario(cmd, doc, ov);
    const RunResult result = run(cmd, sc);
    write_outputs(out_dir, result);
    return kOk;
  } catch (const NumericalError& e) {
    err << "numerical check failed: " << e.what() << "\n";
    return kNumerical;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kValidation;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return kValidation;
  } catch (const std::out_of_range& e) {
    err << "invalid input: " << e.what() << "\n";
    return kValidation;
  } catch (const json::exception& e) {
    err << "invalid input: " << e.what() << "\n";
    return kValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "cannot write outputs: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  }
}

}  // namespace arealaw::runner
