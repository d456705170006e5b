#pragma once

// Spin coupled to a truncated boson mode,
//     H = omega J_z + beta b^dagger b + eta (b^dagger + b) J^2,
// with the closed-form bosonic functions, the closed-form environment factor
// Omega_E and entropy, and a cross-check against exact evolution.
//
// The closed forms are reproduced literally, including their known tensions
// with the exact dynamics (Omega_E(0) = 2 instead of 1, negative literal
// entropy at t = 0). cross_check() quantifies the disagreement instead of
// hiding it.

#include "arealaw/dynamics.hpp"
#include "arealaw/entropy.hpp"
#include "arealaw/linalg.hpp"
#include "arealaw/model.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace arealaw::spin_boson {

struct Params {
  double omega = 1.0;  // rotation frequency
  double beta = 1.0;   // oscillator quantum
  double eta = 0.5;    // coupling strength
  double j = 0.5;      // spin, half-integer >= 1/2
  int nmax = 8;        // boson truncation, dimE = nmax + 1

  Index dim_a() const { return static_cast<Index>(std::lround(2.0 * j)) + 1; }
  Index dim_e() const { return nmax + 1; }
  double gamma() const { return eta * j * (j + 1.0); }

  void validate() const {
    if (beta == 0.0) throw std::invalid_argument("spin_boson: beta must be nonzero");
    const double twice = 2.0 * j;
    if (j < 0.5 || std::abs(twice - std::round(twice)) > 1e-12) {
      throw std::invalid_argument("spin_boson: j must be a half-integer >= 1/2");
    }
    if (nmax < 1) throw std::invalid_argument("spin_boson: nmax must be >= 1");
  }
};

/// J_z in the basis m = j, j-1, ..., -j.
inline ComplexMatrix spin_z(double j) {
  const Index n = static_cast<Index>(std::lround(2.0 * j)) + 1;
  ComplexMatrix jz = ComplexMatrix::Zero(n, n);
  for (Index k = 0; k < n; ++k) jz(k, k) = j - static_cast<double>(k);
  return jz;
}

inline ComplexMatrix number_operator(int nmax) {
  ComplexMatrix n = ComplexMatrix::Zero(nmax + 1, nmax + 1);
  for (int k = 0; k <= nmax; ++k) n(k, k) = k;
  return n;
}

/// b^dagger + b on occupations 0..nmax.
inline ComplexMatrix boson_position(int nmax) {
  ComplexMatrix x = ComplexMatrix::Zero(nmax + 1, nmax + 1);
  for (int k = 1; k <= nmax; ++k) {
    x(k - 1, k) = std::sqrt(static_cast<double>(k));
    x(k, k - 1) = std::sqrt(static_cast<double>(k));
  }
  return x;
}

inline BipartiteSystem build_model(const Params& p) {
  p.validate();
  BipartiteSystem s;
  s.dim_a = p.dim_a();
  s.dim_e = p.dim_e();
  s.h_a = p.omega * spin_z(p.j);
  s.h_e = p.beta * number_operator(p.nmax);
  const ComplexMatrix j2 = p.j * (p.j + 1.0) * identity(s.dim_a);
  s.h_ae = p.eta * kron(j2, boson_position(p.nmax));
  return s;
}

// ---- closed-form bosonic functions -----------------------------------------

struct ClosedForm {
  double alpha = 0.0;
  double zeta = 0.0;
  double psi = 0.0;
};

/// Below this |gamma| the zeta and psi terms use their small-gamma series.
inline constexpr double kGammaSeriesThreshold = 1e-8;

/// beta (1 - cos(gamma t)) / gamma, with the series branch near gamma = 0.
inline double zeta_function(double gamma, double beta, double t) {
  if (std::abs(gamma) < kGammaSeriesThreshold) {
    const double t2 = t * t;
    return beta * (gamma * t2 / 2.0 - gamma * gamma * gamma * t2 * t2 / 24.0);
  }
  // 1 - cos x = 2 sin^2(x/2) avoids cancellation for small gamma t.
  const double half = std::sin(0.5 * gamma * t);
  return 2.0 * beta * half * half / gamma;
}

inline ClosedForm closed_form_functions(const Params& p, double t) {
  p.validate();
  const double g = p.gamma();
  ClosedForm f;
  f.alpha = g * std::sin(p.beta * t) / p.beta;
  f.zeta = zeta_function(g, p.beta, t);
  // Psi from its two squared terms, not through alpha and zeta.
  const double first = g * g * std::sin(p.beta * t) * std::sin(p.beta * t) / (p.beta * p.beta);
  double second;
  if (std::abs(g) < kGammaSeriesThreshold) {
    const double z = zeta_function(g, p.beta, t);
    second = z * z;
  } else {
    const double half = std::sin(0.5 * g * t);
    const double one_minus_cos = 2.0 * half * half;
    second = p.beta * p.beta * one_minus_cos * one_minus_cos / (g * g);
  }
  f.psi = -0.5 * (first + second);
  return f;
}

// ---- E polynomials -----------------------------------------------------------

inline constexpr int kMaxFactorialArg = 20;

inline std::uint64_t factorial(int n) {
  if (n < 0 || n > kMaxFactorialArg) {
    std::ostringstream os;
    os << "factorial: argument " << n << " outside [0, " << kMaxFactorialArg << "]";
    throw std::out_of_range(os.str());
  }
  std::uint64_t f = 1;
  for (int k = 2; k <= n; ++k) f *= static_cast<std::uint64_t>(k);
  return f;
}

/// x^e with 0^0 = 1.
inline double power0(double x, int e) { return e == 0 ? 1.0 : std::pow(x, e); }

inline Complex i_power(int e) {
  static constexpr std::array<Complex, 4> table{Complex{1, 0}, Complex{0, 1}, Complex{-1, 0},
                                               Complex{0, -1}};
  return table[static_cast<std::size_t>(((e % 4) + 4) % 4)];
}

namespace detail {

inline void check_occupation(const Params& p, int n, const char* who) {
  if (p.nmax > kMaxFactorialArg) {
    std::ostringstream os;
    os << who << ": nmax " << p.nmax << " exceeds factorial guard " << kMaxFactorialArg;
    throw std::out_of_range(os.str());
  }
  if (n < 0 || n > p.nmax) {
    std::ostringstream os;
    os << who << ": occupation " << n << " outside [0, " << p.nmax << "]";
    throw std::out_of_range(os.str());
  }
}

}  // namespace detail

/// E_{n,n'}(j, t). The sums run over n2 <= n, n2 <= n3, n4 <= n3, n4 <= n',
/// with the intermediate occupation n3 bounded by the truncation nmax.
inline Complex e_polynomial(const Params& p, double t, int n, int np) {
  detail::check_occupation(p, n, "e_polynomial");
  detail::check_occupation(p, np, "e_polynomial");
  const ClosedForm f = closed_form_functions(p, t);
  Complex sum{0.0, 0.0};
  for (int n2 = 0; n2 <= n; ++n2)
    for (int n3 = n2; n3 <= p.nmax; ++n3)
      for (int n4 = 0; n4 <= std::min(n3, np); ++n4) {
        const double num = static_cast<double>(factorial(n)) * static_cast<double>(factorial(np)) *
                           static_cast<double>(factorial(n3)) * static_cast<double>(factorial(n3));
        const double den = static_cast<double>(factorial(n - n2)) *
                           static_cast<double>(factorial(n3 - n4)) *
                           static_cast<double>(factorial(n3 - n2)) *
                           static_cast<double>(factorial(np - n4));
        const double sign = ((np + n2 - n4) % 2 == 0) ? 1.0 : -1.0;
        sum += i_power(-(n + n3)) * sign * (num / den) * power0(f.alpha, n + n3 - 2 * n2) *
               power0(f.zeta, n3 + np - 2 * n4);
      }
  return std::exp(-kI * p.beta * t) * sum * std::exp(f.psi);
}

/// E*_{n'',n}(j, t), the companion polynomial with i^{n''+n3} and e^{+i beta t}.
inline Complex e_star_polynomial(const Params& p, double t, int npp, int n) {
  detail::check_occupation(p, npp, "e_star_polynomial");
  detail::check_occupation(p, n, "e_star_polynomial");
  const ClosedForm f = closed_form_functions(p, t);
  Complex sum{0.0, 0.0};
  for (int n2 = 0; n2 <= npp; ++n2)
    for (int n3 = n2; n3 <= p.nmax; ++n3)
      for (int n4 = 0; n4 <= std::min(n3, n); ++n4) {
        const double num = static_cast<double>(factorial(npp)) * static_cast<double>(factorial(n)) *
                           static_cast<double>(factorial(n3)) * static_cast<double>(factorial(n3));
        const double den = static_cast<double>(factorial(npp - n2)) *
                           static_cast<double>(factorial(n3 - n2)) *
                           static_cast<double>(factorial(n3 - n4)) *
                           static_cast<double>(factorial(n - n4));
        const double sign = ((n + n2 - n4) % 2 == 0) ? 1.0 : -1.0;
        sum += i_power(npp + n3) * sign * (num / den) * power0(f.alpha, npp + n3 - 2 * n2) *
               power0(f.zeta, n + n3 - 2 * n4);
      }
  return std::exp(kI * p.beta * t) * sum * std::exp(f.psi);
}

/// Omega_E(j, j, t) = sum_n 1/n! sum_{n', n''} E_{n,n'} E*_{n'',n} / sqrt(n'! n''!)
/// over occupations 0..nmax.
inline Complex omega_e_series(const Params& p, double t) {
  p.validate();
  Complex total{0.0, 0.0};
  for (int n = 0; n <= p.nmax; ++n) {
    Complex inner{0.0, 0.0};
    for (int np = 0; np <= p.nmax; ++np)
      for (int npp = 0; npp <= p.nmax; ++npp) {
        inner += e_polynomial(p, t, n, np) * e_star_polynomial(p, t, npp, n) /
                 std::sqrt(static_cast<double>(factorial(np)) * static_cast<double>(factorial(npp)));
      }
    total += inner / static_cast<double>(factorial(n));
  }
  return total;
}

/// Pi(t) for the nmax = 1 environment.
inline double pi_polynomial(const ClosedForm& f) {
  const double a = f.alpha, z = f.zeta;
  return 2.0 * (1.0 + a * (z * z + z - 1.0) + 2.0 * a * a * (1.0 - z)) +
         z * (z * z * z + z * z + z - 1.0) + a * a * a * a * (z * z * z * z - 1.0);
}

/// Omega_E = Pi(t) exp(2 Psi(t)), the closed form for a two-level boson space.
inline double omega_e_closed(const Params& p, double t) {
  const ClosedForm f = closed_form_functions(p, t);
  return pi_polynomial(f) * std::exp(2.0 * f.psi);
}

struct ClosedFormEntropy {
  double omega_e = 0.0;
  std::optional<double> s_raw;  // -Omega ln Omega; undefined when Omega <= 0
  double s_normalized = 0.0;    // spectrum (1 +- |Omega/Omega(0)|)/2
  bool coherence_clipped = false;
};

inline void require_spin_half(const Params& p, const char* who) {
  if (std::abs(p.j - 0.5) > 1e-12) {
    std::ostringstream os;
    os << who << ": closed form exists for j = 1/2 only (got j = " << p.j << ")";
    throw std::invalid_argument(os.str());
  }
}

/// Literal closed-form entropy and its normalized variant. The literal value
/// -Omega ln Omega is not a von Neumann entropy (it is negative at t = 0); the
/// normalized variant treats Omega_E(t)/Omega_E(0) as the coherence of
/// rho_A = 1/2 [[1, c], [c*, 1]].
inline ClosedFormEntropy closed_form_entropy(const Params& p, double t) {
  require_spin_half(p, "closed_form_entropy");
  ClosedFormEntropy e;
  e.omega_e = omega_e_closed(p, t);
  if (e.omega_e > 0.0) e.s_raw = -e.omega_e * std::log(e.omega_e);
  double coherence = std::abs(e.omega_e / omega_e_closed(p, 0.0));
  if (coherence > 1.0) {
    coherence = 1.0;
    e.coherence_clipped = true;
  }
  const double l1 = 0.5 * (1.0 - coherence), l2 = 0.5 * (1.0 + coherence);
  auto h = [](double l) { return l > 0.0 ? -l * std::log(l) : 0.0; };
  e.s_normalized = h(l1) + h(l2);
  return e;
}

/// Gamma = -gamma (ln 2 + 1) with gamma = eta j (j + 1).
inline double closed_form_rate(const Params& p) {
  require_spin_half(p, "closed_form_rate");
  return -p.gamma() * (std::numbers::ln2 + 1.0);
}

// ---- oracle cross-check ---------------------------------------------------------

/// Spin in the uniform superposition sum_m |m>/sqrt(2j+1), boson in vacuum.
/// Its reduced state at t = 0 is the matrix with all entries 1/(2j+1).
inline InitialState coherent_product_start(const Params& p) {
  const Index da = p.dim_a();
  ComplexVector c = ComplexVector::Constant(da, 1.0 / std::sqrt(static_cast<double>(da)));
  ComplexVector e = ComplexVector::Zero(p.dim_e());
  e(0) = 1.0;
  return InitialState::product(c, e);
}

/// sum_m |m>|n = m index>/sqrt(2j+1): a purification of the maximally mixed
/// spin, rho_A(0) = I/(2j+1). Requires nmax >= 2j.
inline InitialState entangled_start(const Params& p) {
  const Index da = p.dim_a(), de = p.dim_e();
  if (de < da) {
    throw std::invalid_argument("spin_boson: entangled start needs nmax >= 2j");
  }
  ComplexVector a = ComplexVector::Zero(da * de);
  for (Index m = 0; m < da; ++m) a(m * de + m) = 1.0 / std::sqrt(static_cast<double>(da));
  return InitialState::pure(std::move(a), da, de);
}

enum class CrossVerdict { match, constant_factor_mismatch, mismatch };

inline std::string_view to_string(CrossVerdict v) {
  switch (v) {
    case CrossVerdict::match: return "match";
    case CrossVerdict::constant_factor_mismatch: return "constant-factor-mismatch";
    case CrossVerdict::mismatch: return "mismatch";
  }
  return "mismatch";
}

struct CrossRow {
  double t = 0.0;
  double omega_closed = 0.0;      // Pi exp(2 Psi)
  Complex omega_series;           // series form at nmax = 1
  double omega_normalized = 0.0;  // omega_closed / omega_closed(0)
  Complex oracle_coherence;       // rho_A^{01}(t) / rho_0^{01}(t), coherent start
  double ratio_raw = 0.0;         // omega_closed / |oracle_coherence|
  double ratio_normalized = 0.0;  // omega_normalized / |oracle_coherence|
  std::optional<double> s_raw;
  double s_normalized = 0.0;
  double s_oracle = 0.0;          // exact entropy, entangled start
  double s_oracle_product = 0.0;  // exact entropy, coherent product start
};

struct CrossCheckReport {
  std::vector<CrossRow> rows;
  CrossVerdict verdict = CrossVerdict::mismatch;
  double factor_at_zero = 0.0;    // ratio_raw at t = 0
  double truncation_drift = 0.0;  // max |S(nmax) - S(nmax + 2)| over grid
  double closed_rate = 0.0;
  RateEstimate oracle_rate;       // entangled start
  std::string note;
};

class TruncationError : public NumericalError {
 public:
  TruncationError(const std::string& what, double drift) : NumericalError(what), drift_(drift) {}
  double drift() const noexcept { return drift_; }

 private:
  double drift_;
};

inline constexpr double kTruncationTol = 1e-6;
inline constexpr double kCrossTol = 1e-8;

inline std::vector<double> oracle_entropies(const Params& p, const InitialState& init,
                                            const TimeGrid& grid) {
  std::vector<double> s;
  for (const DensityMatrix& rho : sweep(build_model(p), init, grid)) {
    s.push_back(von_neumann_entropy(rho));
  }
  return s;
}

/// Tabulates the closed forms against exact evolution on `grid`.
/// Throws TruncationError when raising nmax by 2 moves the oracle entropy by
/// more than 1e-6 anywhere on the grid.
inline CrossCheckReport cross_check(const Params& p, const TimeGrid& grid) {
  require_spin_half(p, "cross_check");
  p.validate();
  grid.validate();
  CrossCheckReport rep;

  const InitialState entangled = entangled_start(p);
  const std::vector<double> s_oracle = oracle_entropies(p, entangled, grid);
  {
    Params wider = p;
    wider.nmax = p.nmax + 2;
    const std::vector<double> s_wide = oracle_entropies(wider, entangled_start(wider), grid);
    for (std::size_t k = 0; k < s_oracle.size(); ++k) {
      rep.truncation_drift = std::max(rep.truncation_drift, std::abs(s_oracle[k] - s_wide[k]));
    }
    if (rep.truncation_drift > kTruncationTol) {
      std::ostringstream os;
      os << "cross_check: boson truncation not converged at nmax=" << p.nmax
         << " (entropy drift " << rep.truncation_drift << " > " << kTruncationTol << ")";
      throw TruncationError(os.str(), rep.truncation_drift);
    }
  }

  const BipartiteSystem sys = build_model(p);
  const InitialState coherent = coherent_product_start(p);
  const std::vector<DensityMatrix> coherent_states = sweep(sys, coherent, grid);
  Params closed = p;
  closed.nmax = 1;
  const double omega0 = omega_e_closed(p, 0.0);
  const double da = static_cast<double>(p.dim_a());

  for (std::size_t k = 0; k < grid.times.size(); ++k) {
    const double t = grid.times[k];
    CrossRow row;
    row.t = t;
    const ClosedFormEntropy ce = closed_form_entropy(p, t);
    row.omega_closed = ce.omega_e;
    row.omega_series = omega_e_series(closed, t);
    row.omega_normalized = ce.omega_e / omega0;
    // rho_0^{m1 m2}(t) = exp(-i omega (m1 - m2) t)/(2j+1); entry (0,1) has m1 - m2 = 1.
    const Complex free_entry = std::exp(-kI * p.omega * t) / da;
    row.oracle_coherence = coherent_states[k].mat(0, 1) / free_entry;
    const double mod = std::abs(row.oracle_coherence);
    row.ratio_raw = row.omega_closed / mod;
    row.ratio_normalized = row.omega_normalized / mod;
    row.s_raw = ce.s_raw;
    row.s_normalized = ce.s_normalized;
    row.s_oracle = s_oracle[k];
    row.s_oracle_product = von_neumann_entropy(coherent_states[k]);
    rep.rows.push_back(row);
  }

  rep.factor_at_zero = rep.rows.front().ratio_raw;
  double dev_one = 0.0, dev_const = 0.0;
  for (const CrossRow& r : rep.rows) {
    dev_one = std::max(dev_one, std::abs(r.ratio_raw - 1.0));
    dev_const = std::max(dev_const, std::abs(r.ratio_raw - rep.factor_at_zero));
  }
  rep.verdict = dev_one <= kCrossTol ? CrossVerdict::match
                : dev_const <= kCrossTol * std::abs(rep.factor_at_zero)
                    ? CrossVerdict::constant_factor_mismatch
                    : CrossVerdict::mismatch;

  rep.closed_rate = closed_form_rate(p);
  rep.oracle_rate = entanglement_rate_at_zero(sys, entangled);

  std::ostringstream note;
  note << "closed-form Omega_E(0) = " << omega0
       << " while the exact coherence factor at t=0 is " << std::abs(rep.rows.front().oracle_coherence)
       << "; literal entropy -Omega ln Omega at t=0 = "
       << (rep.rows.front().s_raw ? *rep.rows.front().s_raw : std::nan(""))
       << " is negative and cannot be a von Neumann entropy; exact entropy of the "
          "maximally mixed start = "
       << rep.rows.front().s_oracle << "; J^2 = j(j+1) I makes the coupling act on E alone, "
          "so exact entropies stay constant (closed-form rate "
       << rep.closed_rate << " vs exact " << rep.oracle_rate.value << ")";
  rep.note = note.str();
  return rep;
}

}  // namespace arealaw::spin_boson
