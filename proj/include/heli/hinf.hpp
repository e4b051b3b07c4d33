#pragma once

// gamma-suboptimal H-infinity state feedback: controlled-output weights,
// the game-type Riccati equation, gains, gamma* bisection and a frequency-grid
// H-infinity norm.

#include <algorithm>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "heli/config.hpp"
#include "heli/trim.hpp"

extern "C" {
void dgees_(const char* jobvs, const char* sort, int (*select)(const double*, const double*),
            const int* n, double* a, const int* lda, int* sdim, double* wr, double* wi,
            double* vs, const int* ldvs, double* work, const int* lwork, int* bwork,
            int* info);
}

namespace heli {

using Eigen::MatrixXd;
using Eigen::VectorXd;

class SynthesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OutputWeights {
  Eigen::Matrix4d c11 = Eigen::Matrix4d::Identity();
  Eigen::Matrix<double, 2, 5> c22 = Eigen::Matrix<double, 2, 5>::Zero();
  Eigen::Matrix3d d11 = Eigen::Matrix3d::Identity();

  /// Values identified in hover ground tests for the reference airframe.
  static OutputWeights reference() {
    OutputWeights w;
    w.c11 = Eigen::Vector4d(13, 11, 1, 1).asDiagonal();
    w.c22 << 0, 0, 1, 0, 0,
             0, 0, 0, 0, 5;
    w.d11 = Eigen::Vector3d(12, 11, 31).asDiagonal();
    return w;
  }
};

/// Attenuation level quoted for the reference airframe; kept for reports only.
inline constexpr double kReferenceGamma = 0.0632;

struct ControlledOutputMap {
  Eigen::Matrix<double, 9, kLinStates> c;
  Eigen::Matrix<double, 9, kLinInputs> d;
};

/// h = C x + D u with rows [D11 u; C11 x(1:4); C22 x(5:9)].
inline ControlledOutputMap build_output_map(const OutputWeights& w) {
  Eigen::FullPivLU<Eigen::Matrix3d> lu(w.d11);
  if (!lu.isInvertible()) throw SynthesisError("output weight D11 is singular");
  ControlledOutputMap m;
  m.c.setZero();
  m.d.setZero();
  m.d.topRows<3>() = w.d11;
  m.c.block<4, 4>(3, 0) = w.c11;
  m.c.block<2, 5>(7, 4) = w.c22;
  return m;
}

enum class Infeasibility {
  imaginary_axis_eigenvalues,
  singular_x1,
  verification_failed,  // not PSD, not stabilizing, or residual too large
};

inline const char* to_string(Infeasibility r) {
  switch (r) {
    case Infeasibility::imaginary_axis_eigenvalues: return "imaginary-axis eigenvalues";
    case Infeasibility::singular_x1: return "singular X1";
    case Infeasibility::verification_failed: return "verification failed";
  }
  return "?";
}

struct RiccatiSolution {
  MatrixXd p;
  double gamma = 0.0;
  double residual_norm = 0.0;
  double min_eigenvalue = 0.0;
};

struct RiccatiOutcome {
  std::optional<RiccatiSolution> solution;
  std::optional<Infeasibility> reason;
  std::string detail;

  bool feasible() const { return solution.has_value(); }
};

/// Real Schur form with the open-left-half-plane eigenvalues ordered first.
struct OrderedSchur {
  MatrixXd t;
  MatrixXd z;
  VectorXd wr, wi;
  int stable_count = 0;
};

namespace detail {
inline int select_open_left(const double* wr, const double* /*wi*/) { return *wr < 0.0; }
}  // namespace detail

inline OrderedSchur ordered_real_schur(const MatrixXd& h) {
  const int n = static_cast<int>(h.rows());
  OrderedSchur s;
  s.t = h;
  s.z.resize(n, n);
  s.wr.resize(n);
  s.wi.resize(n);
  int sdim = 0, info = 0, lwork = -1;
  std::vector<int> bwork(n);
  double query = 0.0;
  const char jobvs = 'V', sort = 'S';
  dgees_(&jobvs, &sort, detail::select_open_left, &n, s.t.data(), &n, &sdim,
         s.wr.data(), s.wi.data(), s.z.data(), &n, &query, &lwork, bwork.data(), &info);
  lwork = static_cast<int>(query);
  std::vector<double> work(static_cast<std::size_t>(std::max(lwork, 1)));
  dgees_(&jobvs, &sort, detail::select_open_left, &n, s.t.data(), &n, &sdim,
         s.wr.data(), s.wi.data(), s.z.data(), &n, work.data(), &lwork, bwork.data(),
         &info);
  if (info < 0 || (info > 0 && info <= n)) {
    throw SynthesisError("dgees failed with info " + std::to_string(info));
  }
  // info == n+1 or n+2: reordering was ill-conditioned; the caller's
  // verification decides whether the subspace is usable.
  s.stable_count = sdim;
  return s;
}

inline bool is_hurwitz(const MatrixXd& a, double margin = 0.0) {
  Eigen::EigenSolver<MatrixXd> es(a, false);
  return (es.eigenvalues().real().array() < -margin).all();
}

/// Left-hand side of
///   P A + A'P + C'C + P E E' P / g^2 - (P B + C'D)(D'D)^-1 (D'C + B'P).
inline MatrixXd riccati_residual(const MatrixXd& p, const MatrixXd& a, const MatrixXd& b,
                                 const MatrixXd& c, const MatrixXd& d, const MatrixXd& e,
                                 double gamma) {
  const MatrixXd r = d.transpose() * d;
  const MatrixXd pb_cd = p * b + c.transpose() * d;
  return p * a + a.transpose() * p + c.transpose() * c +
         p * e * e.transpose() * p / (gamma * gamma) -
         pb_cd * r.ldlt().solve(pb_cd.transpose());
}

inline void check_dimensions(const MatrixXd& a, const MatrixXd& b, const MatrixXd& c,
                             const MatrixXd& d, const MatrixXd& e) {
  const auto n = a.rows();
  if (a.cols() != n || b.rows() != n || c.cols() != n || e.rows() != n ||
      d.rows() != c.rows() || d.cols() != b.cols()) {
    throw std::invalid_argument("dimension mismatch in (A, B, C, D, E)");
  }
}

/// Stabilizing solution of the gamma-parameterized Riccati equation via
/// the stable invariant subspace of the completed-square Hamiltonian.
inline RiccatiOutcome solve_riccati(const MatrixXd& a, const MatrixXd& b, const MatrixXd& c,
                                    const MatrixXd& d, const MatrixXd& e, double gamma) {
  check_dimensions(a, b, c, d, e);
  if (!(gamma > 0)) throw std::invalid_argument("gamma must be positive");
  const auto n = a.rows();
  const MatrixXd r = d.transpose() * d;
  Eigen::LDLT<MatrixXd> r_ldlt(r);
  if (r_ldlt.info() != Eigen::Success || Eigen::FullPivLU<MatrixXd>(d).rank() < d.cols()) {
    throw SynthesisError("D must have full column rank");
  }

  const MatrixXd a_t = a - b * r_ldlt.solve(d.transpose() * c);
  const MatrixXd s = b * r_ldlt.solve(b.transpose()) -
                     e * e.transpose() / (gamma * gamma);
  const MatrixXd q = c.transpose() * c -
                     c.transpose() * d * r_ldlt.solve(d.transpose() * c);

  MatrixXd h(2 * n, 2 * n);
  h << a_t, -s, -q, -a_t.transpose();

  RiccatiOutcome out;
  const OrderedSchur schur = ordered_real_schur(h);
  const double h_scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    if (std::abs(schur.wr[i]) < 1e-9 * h_scale) {
      out.reason = Infeasibility::imaginary_axis_eigenvalues;
      out.detail = "Hamiltonian eigenvalue " + std::to_string(schur.wr[i]) + " + " +
                   std::to_string(schur.wi[i]) + "i on the imaginary axis";
      return out;
    }
  }
  if (schur.stable_count != n) {
    out.reason = Infeasibility::imaginary_axis_eigenvalues;
    out.detail = "stable subspace has dimension " + std::to_string(schur.stable_count);
    return out;
  }

  const MatrixXd x1 = schur.z.topLeftCorner(n, n);
  const MatrixXd x2 = schur.z.bottomLeftCorner(n, n);
  Eigen::JacobiSVD<MatrixXd> svd(x1);
  const double sv_max = svd.singularValues()(0);
  const double sv_min = svd.singularValues()(n - 1);
  if (!(sv_min > 1e-12 * std::max(1.0, sv_max))) {
    out.reason = Infeasibility::singular_x1;
    out.detail = "X1 smallest singular value " + std::to_string(sv_min);
    return out;
  }
  MatrixXd p = x1.transpose().fullPivLu().solve(x2.transpose()).transpose();
  p = 0.5 * (p + p.transpose()).eval();

  RiccatiSolution sol;
  sol.p = p;
  sol.gamma = gamma;
  sol.residual_norm = riccati_residual(p, a, b, c, d, e, gamma).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(p, Eigen::EigenvaluesOnly);
  sol.min_eigenvalue = eig.eigenvalues().minCoeff();

  const double p_max = p.cwiseAbs().maxCoeff();
  if (sol.min_eigenvalue < -1e-10) {
    out.reason = Infeasibility::verification_failed;
    out.detail = "P not positive semidefinite, min eigenvalue " +
                 std::to_string(sol.min_eigenvalue);
    return out;
  }
  if (!is_hurwitz(a_t - s * p)) {
    out.reason = Infeasibility::verification_failed;
    out.detail = "P is not stabilizing";
    return out;
  }
  if (!(sol.residual_norm < 1e-8 * (1.0 + p_max))) {
    out.reason = Infeasibility::verification_failed;
    out.detail = "Riccati residual " + std::to_string(sol.residual_norm);
    return out;
  }
  out.solution = std::move(sol);
  return out;
}

struct GammaTraceEntry {
  double gamma = 0.0;
  bool feasible = false;
  std::string reason;
};

struct GammaSearchResult {
  double gamma_star = 0.0;  // smallest feasible level found (upper bracket)
  double gamma_lower = 0.0; // largest infeasible level found
  double gamma = 0.0;       // level used for the returned solution
  RiccatiSolution solution;
  std::vector<GammaTraceEntry> trace;
};

/// Bisection on Riccati feasibility. The returned solution sits at
/// (1 + margin) gamma*.
inline GammaSearchResult gamma_star(const MatrixXd& a, const MatrixXd& b, const MatrixXd& c,
                                    const MatrixXd& d, const MatrixXd& e, double tol,
                                    double margin = 0.05) {
  if (!(tol > 0)) throw std::invalid_argument("tol must be positive");
  constexpr double kUpper = 1e6;
  constexpr double kFloor = 1e-9;
  GammaSearchResult res;
  auto probe = [&](double g) {
    const RiccatiOutcome o = solve_riccati(a, b, c, d, e, g);
    res.trace.push_back({g, o.feasible(), o.reason ? to_string(*o.reason) : ""});
    return o.feasible();
  };
  if (!probe(kUpper)) {
    throw SynthesisError("Riccati equation infeasible at the upper bound gamma = 1e6");
  }
  double hi = kUpper;
  double lo = 0.0;
  for (double g = kUpper / 10; g >= kFloor; g /= 10) {
    if (probe(g)) {
      hi = g;
    } else {
      lo = g;
      break;
    }
  }
  if (lo == 0.0) {
    // Feasible down to the floor: no effective disturbance channel.
    res.gamma_star = 0.0;
    res.gamma_lower = 0.0;
    res.gamma = hi;
  } else {
    while (hi - lo > tol * hi) {
      const double mid = 0.5 * (lo + hi);
      (probe(mid) ? hi : lo) = mid;
    }
    res.gamma_star = hi;
    res.gamma_lower = lo;
    res.gamma = (1.0 + margin) * hi;
  }
  RiccatiOutcome o = solve_riccati(a, b, c, d, e, res.gamma);
  if (!o.feasible()) {
    throw SynthesisError(std::string("suboptimal level infeasible: ") + o.detail);
  }
  res.solution = std::move(*o.solution);
  return res;
}

struct SynthesisResult {
  MatrixXd f;  // m x n
  MatrixXd g;  // m x tracked
  double gamma = 0.0;
  RiccatiSolution riccati;
  std::vector<int> tracked_rows;
  Eigen::VectorXd h_out_trim;
  Eigen::VectorXd u_trim;  // inner-loop inputs at trim
};

inline MatrixXd row_selector(const std::vector<int>& rows, Eigen::Index n) {
  MatrixXd s = MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), n);
  for (std::size_t i = 0; i < rows.size(); ++i) s(static_cast<Eigen::Index>(i), rows[i]) = 1.0;
  return s;
}

/// F = -(D'D)^-1 (D'C + B'P), G = -[C'(A + BF)^-1 B]^-1.
inline SynthesisResult compute_gains(const RiccatiSolution& ric, const MatrixXd& a,
                                     const MatrixXd& b, const MatrixXd& c, const MatrixXd& d,
                                     const std::vector<int>& tracked_rows) {
  SynthesisResult out;
  out.riccati = ric;
  out.gamma = ric.gamma;
  out.tracked_rows = tracked_rows;
  const MatrixXd r = d.transpose() * d;
  out.f = -r.ldlt().solve(d.transpose() * c + b.transpose() * ric.p);
  const MatrixXd a_cl = a + b * out.f;
  if (!is_hurwitz(a_cl)) throw SynthesisError("A + B F is not Hurwitz");
  const MatrixXd sel = row_selector(tracked_rows, a.rows());
  const MatrixXd dc = sel * a_cl.fullPivLu().solve(b);
  Eigen::FullPivLU<MatrixXd> dc_lu(dc);
  if (dc.rows() != dc.cols() || !dc_lu.isInvertible()) {
    throw SynthesisError("DC gain C'(A+BF)^-1 B is not invertible");
  }
  out.g = -dc_lu.inverse();
  return out;
}

/// Full 9-state design on a linearized plant with the given weights.
struct InnerLoopDesign {
  ControlledOutputMap outputs;
  GammaSearchResult search;
  SynthesisResult gains;
};

inline InnerLoopDesign synthesize_inner_loop(const LinearPlant& plant,
                                             const OutputWeights& weights,
                                             double tol = 1e-4, double margin = 0.05) {
  InnerLoopDesign des;
  des.outputs = build_output_map(weights);
  des.search = gamma_star(plant.a, plant.b, des.outputs.c, des.outputs.d, plant.e, tol, margin);
  des.gains = compute_gains(des.search.solution, plant.a, plant.b, des.outputs.c,
                            des.outputs.d, {lin::tracked.begin(), lin::tracked.end()});
  des.gains.h_out_trim = plant.trim.h_out_trim;
  des.gains.u_trim = plant.trim.u_trim.cyclic_pedal();
  return des;
}

inline double sigma_max_at(const MatrixXd& a, const MatrixXd& e, const MatrixXd& c,
                           const MatrixXd& d_ff, double omega) {
  using Cd = std::complex<double>;
  const auto n = a.rows();
  const Eigen::MatrixXcd jw_a =
      Cd(0.0, omega) * Eigen::MatrixXcd::Identity(n, n) - a.cast<Cd>();
  const Eigen::MatrixXcd t =
      c.cast<Cd>() * jw_a.partialPivLu().solve(e.cast<Cd>()) + d_ff.cast<Cd>();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(t);
  return svd.singularValues()(0);
}

/// sup over omega of sigma_max(C (jwI - A)^-1 E + D): log grid 1e-3..1e4 rad/s
/// (2000 points, plus DC), refined by golden-section search.
inline double hinf_norm(const MatrixXd& a_cl, const MatrixXd& e, const MatrixXd& c_cl,
                        const std::optional<MatrixXd>& d_ff = std::nullopt) {
  if (!is_hurwitz(a_cl)) throw SynthesisError("hinf_norm requires a Hurwitz system");
  const MatrixXd d = d_ff.value_or(MatrixXd::Zero(c_cl.rows(), e.cols()));
  constexpr int kPoints = 2000;
  const double lg_lo = -3.0, lg_hi = 4.0;
  auto omega_at = [&](int i) {
    return std::pow(10.0, lg_lo + (lg_hi - lg_lo) * i / (kPoints - 1));
  };
  double best = sigma_max_at(a_cl, e, c_cl, d, 0.0);
  int best_i = -1;
  for (int i = 0; i < kPoints; ++i) {
    const double s = sigma_max_at(a_cl, e, c_cl, d, omega_at(i));
    if (s > best) {
      best = s;
      best_i = i;
    }
  }
  if (best_i < 0) return best;
  // Golden-section in log-frequency over the neighbouring grid cells.
  double lo = std::log10(omega_at(std::max(best_i - 1, 0)));
  double hi = std::log10(omega_at(std::min(best_i + 1, kPoints - 1)));
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  auto f = [&](double lg) { return sigma_max_at(a_cl, e, c_cl, d, std::pow(10.0, lg)); };
  double x1 = hi - ratio * (hi - lo), x2 = lo + ratio * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 60; ++it) {
    if (f1 > f2) {
      hi = x2; x2 = x1; f2 = f1;
      x1 = hi - ratio * (hi - lo); f1 = f(x1);
    } else {
      lo = x1; x1 = x2; f1 = f2;
      x2 = lo + ratio * (hi - lo); f2 = f(x2);
    }
  }
  return std::max({best, f1, f2});
}

/// Closed-loop disturbance-to-controlled-output norm of a synthesis.
inline double closed_loop_hinf_norm(const LinearPlant& plant, const ControlledOutputMap& out,
                                    const SynthesisResult& syn) {
  const MatrixXd a_cl = plant.a + plant.b * syn.f;
  const MatrixXd c_cl = out.c + out.d * syn.f;
  return hinf_norm(a_cl, plant.e, c_cl);
}

enum SaturationFlag : unsigned {
  sat_lat = 1u << 0,
  sat_lon = 1u << 1,
  sat_ped = 1u << 2,
  sat_col = 1u << 3,
  sat_flap = 1u << 4,
  sat_tilt = 1u << 5,
};

struct InnerLoopCommand {
  Eigen::Vector3d u = Eigen::Vector3d::Zero();  // dlat, dlon, dped (actual, clamped)
  unsigned saturation = 0;
};

/// u = F x + G (r - h_out_trim), applied on top of the trim inputs.
inline InnerLoopCommand control_law(const SynthesisResult& syn, const VectorXd& x,
                                    const VectorXd& attitude_ref) {
  const VectorXd du = syn.f * x + syn.g * (attitude_ref - syn.h_out_trim);
  InnerLoopCommand cmd;
  for (int i = 0; i < 3; ++i) {
    const double raw = syn.u_trim[i] + du[i];
    cmd.u[i] = clamp_unit(raw);
    if (cmd.u[i] != raw) cmd.saturation |= (1u << i);
  }
  return cmd;
}

struct FeasibilityDiagnostics {
  int d_rank = 0;
  int d_cols = 0;
  bool d_full_column_rank = false;
  bool left_invertible = false;
  std::vector<std::complex<double>> invariant_zeros;
  bool has_finite_zero() const { return !invariant_zeros.empty(); }
};

/// Rank of D and finite invariant zeros of (A, B, C, D). With D of full
/// column rank, the Rosenbrock pencil drops rank exactly at the unobservable
/// modes of (A - B D^+ C, N' C), N spanning the left null space of D.
inline FeasibilityDiagnostics check_feasibility(const MatrixXd& a, const MatrixXd& b,
                                                const MatrixXd& c, const MatrixXd& d) {
  FeasibilityDiagnostics diag;
  Eigen::ColPivHouseholderQR<MatrixXd> qr(d);
  diag.d_rank = static_cast<int>(qr.rank());
  diag.d_cols = static_cast<int>(d.cols());
  diag.d_full_column_rank = diag.d_rank == diag.d_cols;
  if (!diag.d_full_column_rank) return diag;
  diag.left_invertible = true;

  const auto n = a.rows();
  const auto m = d.cols();
  const auto rows = d.rows();
  const MatrixXd q_full = qr.householderQ() * MatrixXd::Identity(rows, rows);
  const MatrixXd null_left = q_full.rightCols(rows - m);
  const MatrixXd d_pinv = d.completeOrthogonalDecomposition().pseudoInverse();
  const MatrixXd a_red = a - b * d_pinv * c;
  const MatrixXd c_red = null_left.transpose() * c;

  using Cd = std::complex<double>;
  Eigen::EigenSolver<MatrixXd> es(a_red, false);
  const double scale = std::max(1.0, std::max(a_red.cwiseAbs().maxCoeff(),
                                              c_red.size() ? c_red.cwiseAbs().maxCoeff() : 0.0));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Cd lambda = es.eigenvalues()[i];
    Eigen::MatrixXcd pbh(n + c_red.rows(), n);
    pbh.topRows(n) = a_red.cast<Cd>() - lambda * Eigen::MatrixXcd::Identity(n, n);
    pbh.bottomRows(c_red.rows()) = c_red.cast<Cd>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pbh);
    if (svd.singularValues()(n - 1) < 1e-9 * scale) diag.invariant_zeros.push_back(lambda);
  }
  return diag;
}

}  // namespace heli
