#include "clab/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace clab {

namespace {

std::vector<double> squares(std::initializer_list<const ScalarField*> fs, std::size_t n) {
  std::vector<double> out(n, 0.0);
  for (const ScalarField* f : fs) {
    const auto v = f->values();
    for (std::size_t i = 0; i < n; ++i) out[i] += v[i] * v[i];
  }
  return out;
}

}  // namespace

// --- Lemma 1 -----------------------------------------------------------------

namespace {

// Replace the boundary-node values of d = D^order u along `axis` by third-order
// one-sided differences (4 points for D, 5 for D^2). Needs 5 nodes on the axis.
ScalarField sharpen_closure(ScalarField d, const ScalarField& u, int axis, int order) {
  const int n = u.extent(axis);
  if (n < 5) return d;
  const double h = axis == 0 ? u.grid().xp.h : u.grid().xn.h;
  const auto e = u.extents();
  for (int end : {0, n - 1}) {
    const int dir = end == 0 ? 1 : -1;
    for (int i = 0; i < (axis == 0 ? 1 : e[0]); ++i) {
      for (int j = 0; j < (axis == 1 ? 1 : e[1]); ++j) {
        for (int k = 0; k < e[2]; ++k) {
          auto at = [&](int m) {
            const int p = end + dir * m;
            return axis == 0 ? u(p, j, k) : u(i, p, k);
          };
          double& out = axis == 0 ? d(end, j, k) : d(i, end, k);
          if (order == 1) {
            out = dir * (-11.0 * at(0) + 18.0 * at(1) - 9.0 * at(2) + 2.0 * at(3)) / (6.0 * h);
          } else {
            out = (35.0 * at(0) - 104.0 * at(1) + 114.0 * at(2) - 56.0 * at(3) + 11.0 * at(4)) / (12.0 * h * h);
          }
        }
      }
    }
  }
  return d;
}

}  // namespace

Lemma1Result lemma1_residual(const ScalarField& w) {
  if (w.kind() != FieldKind::SpaceOnly) throw GridError("lemma1_residual expects a field of kind space_only");
  const ScalarField w1 = sharpen_closure(dxp(w), w, 0, 1);
  const ScalarField w2 = sharpen_closure(dxn(w), w, 1, 1);
  const ScalarField w11 = sharpen_closure(dxp2(w), w, 0, 2);
  const ScalarField w22 = sharpen_closure(dxn2(w), w, 1, 2);
  const ScalarField w12 = sharpen_closure(dxn(w1), w1, 1, 1);
  const ScalarField lap = w11 + w22;

  Lemma1Result r;
  const auto wt = trapezoid_weights(w, Region::all());
  for (std::size_t i = 0; i < wt.size(); ++i) {
    const double a = w11.values()[i];
    const double b = w12.values()[i];
    const double c = w22.values()[i];
    r.hessian += wt[i] * (a * a + 2.0 * b * b + c * c);
    r.laplacian += wt[i] * (a + c) * (a + c);
  }

  // On x' = const the normal is -+e_1 and the integrand reduces to
  // nu_1 (w_1 w_22 - w_2 w_12); on x_n = const to nu_2 (w_2 w_11 - w_1 w_12).
  auto side = [&](Face face, double sign, bool normal_is_xp) {
    const ScalarField a1 = trace(w1, face);
    const ScalarField a2 = trace(w2, face);
    const ScalarField a11 = trace(w11, face);
    const ScalarField a22 = trace(w22, face);
    const ScalarField a12 = trace(w12, face);
    const auto fw = trapezoid_weights(a1, Region::all());
    double acc = 0.0;
    for (std::size_t i = 0; i < fw.size(); ++i) {
      const double v = normal_is_xp
                           ? a1.values()[i] * a22.values()[i] - a2.values()[i] * a12.values()[i]
                           : a2.values()[i] * a11.values()[i] - a1.values()[i] * a12.values()[i];
      acc += fw[i] * v;
    }
    return sign * acc;
  };
  const bool hi = w.geometry().gamma_side == GammaSide::Hi;
  const Face x_hi = hi ? Face::GammaSide : Face::OppositeSide;
  const Face x_lo = hi ? Face::OppositeSide : Face::GammaSide;
  r.boundary = side(x_hi, 1.0, true) + side(x_lo, -1.0, true) + side(Face::XnEll, 1.0, false);
  r.boundary += w.geometry().extended ? side(Face::XnNegEll, -1.0, false)
                                      : side(Face::XnZero, -1.0, false);

  const double gap = std::abs(r.hessian + r.boundary - r.laplacian);
  if (r.laplacian > 0.0) {
    r.residual = gap / r.laplacian;
  } else {
    r.residual = gap;
    r.absolute = true;
  }
  return r;
}

// --- weighted sides ----------------------------------------------------------

double InequalitySides::lhs_log() const {
  return lhs > 0.0 ? std::log(lhs) + 2.0 * s * phi_max : -std::numeric_limits<double>::infinity();
}

double InequalitySides::rhs_log() const {
  return rhs > 0.0 ? std::log(rhs) + 2.0 * s * phi_max : -std::numeric_limits<double>::infinity();
}

WeightedEvaluator::WeightedEvaluator(const ScalarField& u, const WeightPlan& plan,
                                     const ScalarField& p0) {
  const CylinderGeometry& g = u.geometry();
  if (u.kind() != FieldKind::SpaceTime || !g.extended) {
    throw GridError("weighted sides need a space-time field on the extended cylinder");
  }
  if (p0.kind() != FieldKind::CrossSectionTime || !(p0.geometry() == g)) {
    throw GridError("p0 must be a cross-section-time field on the grid of u");
  }
  const ScalarField phi = plan.phi_field(g);
  phi_max_ = phi.max_abs();
  const std::size_t n = u.size();

  const ScalarField u1 = dxp(u);
  const ScalarField u2 = dxn(u);
  const ScalarField ut = dt(u);
  const ScalarField u11 = dxp2(u);
  const ScalarField u22 = dxn2(u);
  const ScalarField u12 = dxn(u1);
  const ScalarField lap = u11 + u22;
  const ScalarField res = ut - lap - broadcast(p0, FieldKind::SpaceTime).hadamard(u);

  weight_ = trapezoid_weights(u, Region::all());
  phi_.assign(phi.values().begin(), phi.values().end());
  hessian_sq_ = squares({&u11, &u12, &u12, &u22}, n);
  laplacian_sq_ = squares({&lap}, n);
  grad_sq_ = squares({&u1, &u2}, n);
  u_sq_ = squares({&u}, n);
  residual_sq_ = squares({&res}, n);

  for (clab::Face f : {clab::Face::GammaSide, clab::Face::OppositeSide, clab::Face::XnEll,
                       clab::Face::XnNegEll}) {
    FaceTerms face;
    face.u = trace(u, f);
    face.phi = trace(phi, f);
    const ScalarField a = trace(u1, f);
    const ScalarField b = trace(u2, f);
    const ScalarField c = trace(ut, f);
    face.weight = trapezoid_weights(face.u, Region::all());
    face.grad_sq = squares({&a, &b, &c}, face.u.size());
    face.u_sq = squares({&face.u}, face.u.size());
    face.tangent_axis = (f == clab::Face::GammaSide || f == clab::Face::OppositeSide) ? 1 : 0;
    faces_.push_back(std::move(face));
  }

  const ScalarField tp = trace(u, clab::Face::TPlusDelta);
  const ScalarField tm = trace(u, clab::Face::TMinusDelta);
  const ScalarField tp1 = dxp(tp), tp2 = dxn(tp), tm1 = dxp(tm), tm2 = dxn(tm);
  terminal_weight_ = trapezoid_weights(tp, Region::all());
  terminal_plus_ = squares({&tp, &tp1, &tp2}, tp.size());
  terminal_minus_ = squares({&tm, &tm1, &tm2}, tm.size());
  const ScalarField phid = trace(phi, clab::Face::TPlusDelta);
  terminal_phi_.assign(phid.values().begin(), phid.values().end());
}

InequalitySides WeightedEvaluator::evaluate(double s, bool carleman) const {
  if (!(s > 0.0)) throw GridError("weighted sides need s > 0");
  InequalitySides r;
  r.s = s;
  r.phi_max = phi_max_;
  const double s3 = s * s * s;
  auto shift = [&](double phi) { return std::exp(2.0 * s * (phi - phi_max_)); };

  double second = 0.0, grad = 0.0, val = 0.0, residual = 0.0;
  for (std::size_t i = 0; i < weight_.size(); ++i) {
    const double e = weight_[i] * shift(phi_[i]);
    second += e * (carleman ? hessian_sq_[i] : laplacian_sq_[i]);
    grad += e * grad_sq_[i];
    val += e * u_sq_[i];
    residual += e * residual_sq_[i];
  }
  r.lhs = second / s + s * grad + s3 * val;

  double bgrad = 0.0, bval = 0.0, trace_h2 = 0.0;
  for (const FaceTerms& f : faces_) {
    ScalarField w = f.u;
    const auto ph = f.phi.values();
    auto wv = w.values();
    for (std::size_t i = 0; i < f.weight.size(); ++i) {
      const double e = shift(ph[i]);
      bgrad += f.weight[i] * e * f.grad_sq[i];
      bval += f.weight[i] * e * f.u_sq[i];
      wv[i] *= std::exp(s * (ph[i] - phi_max_));
    }
    if (carleman) {
      const ScalarField w1 = differentiate(w, f.tangent_axis, 1);
      const ScalarField w2 = differentiate(w, f.tangent_axis, 2);
      for (std::size_t i = 0; i < f.weight.size(); ++i) {
        const double a = wv[i], b = w1.values()[i], c = w2.values()[i];
        trace_h2 += f.weight[i] * (a * a + b * b + c * c);
      }
    }
  }

  double tplus = 0.0, tminus = 0.0;
  for (std::size_t i = 0; i < terminal_weight_.size(); ++i) {
    const double e = terminal_weight_[i] * shift(terminal_phi_[i]);
    tplus += e * terminal_plus_[i];
    tminus += e * terminal_minus_[i];
  }

  r.rhs_terms = {residual, s3 * bgrad, s3 * bval, carleman ? trace_h2 / s : 0.0, s3 * tplus, s3 * tminus};
  r.rhs = 0.0;
  for (double t : r.rhs_terms) r.rhs += t;
  return r;
}

InequalitySides WeightedEvaluator::carleman(double s) const { return evaluate(s, true); }
InequalitySides WeightedEvaluator::standard(double s) const { return evaluate(s, false); }

InequalitySides carleman_sides(const ScalarField& u, const WeightPlan& plan, double s,
                               const ScalarField& p0) {
  return WeightedEvaluator(u, plan, p0).carleman(s);
}

InequalitySides standard_estimate_sides(const ScalarField& u, const WeightPlan& plan, double s,
                                        const ScalarField& p0) {
  return WeightedEvaluator(u, plan, p0).standard(s);
}

// --- corpus ------------------------------------------------------------------

std::vector<CorpusMember> make_corpus(const CylinderGeometry& geometry, int count, std::uint64_t seed,
                                      bool time_dependent) {
  constexpr int kModes = 4;
  const double xl = geometry.d_lo;
  const double xw = geometry.d_hi - geometry.d_lo;
  const double ell = geometry.ell;
  const double delta = geometry.delta;
  std::vector<CorpusMember> out;
  for (int m = 0; m < count; ++m) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(m);
    std::mt19937_64 gen(s);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::array<std::array<double, 2>, 3> phases{};
    for (auto& p : phases) p = {phase(gen), phase(gen)};
    std::array<double, kModes * kModes * kModes> c{};
    for (int a = 0; a < kModes; ++a) {
      for (int b = 0; b < kModes; ++b) {
        for (int k = 0; k < kModes; ++k) {
          const double v = coef(gen);
          c[static_cast<std::size_t>((a * kModes + b) * kModes + k)] = (time_dependent || k == 0) ? v : 0.0;
        }
      }
    }
    CorpusMember member;
    member.seed = s;
    member.eval = [=](double x, double z, double t) {
      const std::array<double, 3> q{(x - xl) / xw, z / ell, t / delta};
      std::array<std::array<double, kModes>, 3> mode{};
      for (std::size_t a = 0; a < 3; ++a) {
        mode[a] = {1.0, q[a], std::cos(std::numbers::pi * q[a] + phases[a][0]),
                   std::sin(2.0 * std::numbers::pi * q[a] + phases[a][1])};
      }
      double acc = 0.0;
      for (int a = 0; a < kModes; ++a) {
        for (int b = 0; b < kModes; ++b) {
          const double ab = mode[0][static_cast<std::size_t>(a)] * mode[1][static_cast<std::size_t>(b)];
          for (int k = 0; k < kModes; ++k) {
            acc += c[static_cast<std::size_t>((a * kModes + b) * kModes + k)] * ab *
                   mode[2][static_cast<std::size_t>(k)];
          }
        }
      }
      return acc;
    };
    out.push_back(std::move(member));
  }
  return out;
}

Lemma1Study lemma1_study(const CylinderGeometry& geometry, const std::vector<CorpusMember>& corpus) {
  Lemma1Study st;
  st.geometry_hash = geometry.hash();
  const CylinderGeometry fine = geometry.refined();
  int in_band = 0;
  for (std::size_t m = 0; m < corpus.size(); ++m) {
    auto at_rest = [&](double x, double z, double) { return corpus[m].eval(x, z, 0.0); };
    const Lemma1Result coarse = lemma1_residual(ScalarField::sample(geometry, FieldKind::SpaceOnly, at_rest));
    const Lemma1Result refined = lemma1_residual(ScalarField::sample(fine, FieldKind::SpaceOnly, at_rest));
    Lemma1Row row;
    row.member = static_cast<int>(m);
    row.residual = coarse.residual;
    row.residual_refined = refined.residual;
    row.ratio = coarse.residual / refined.residual;
    row.absolute = coarse.absolute || refined.absolute;
    if (row.ratio >= 3.5 && row.ratio <= 4.5) ++in_band;
    st.rows.push_back(row);
  }
  st.fraction_in_band = corpus.empty() ? 0.0 : static_cast<double>(in_band) / static_cast<double>(corpus.size());
  return st;
}

CarlemanReport certify_carleman(const CylinderGeometry& extended_geometry, const WeightPlan& plan,
                                const std::vector<CorpusMember>& corpus,
                                const std::vector<double>& s_grid, double C_cap,
                                const std::function<double(double, double)>& p0) {
  if (!extended_geometry.extended) throw GridError("certification runs on the extended cylinder");
  if (s_grid.empty() || !std::is_sorted(s_grid.begin(), s_grid.end())) {
    throw GridError("s grid must be non-empty and increasing");
  }
  CarlemanReport rep;
  rep.s_grid = s_grid;
  rep.C_cap = C_cap;
  rep.corpus_size = static_cast<int>(corpus.size());
  rep.geometry_hash = extended_geometry.hash();
  const ScalarField p0f = ScalarField::sample(extended_geometry, FieldKind::CrossSectionTime,
                                              [&](double x, double, double t) { return p0(x, t); });
  std::vector<double> worst(s_grid.size(), 0.0);
  for (std::size_t m = 0; m < corpus.size(); ++m) {
    const ScalarField u = ScalarField::sample(extended_geometry, FieldKind::SpaceTime, corpus[m].eval);
    const WeightedEvaluator ev(u, plan, p0f);
    for (std::size_t j = 0; j < s_grid.size(); ++j) {
      const InequalitySides r = ev.carleman(s_grid[j]);
      rep.rows.push_back({static_cast<int>(m), s_grid[j], r.lhs_log(), r.rhs_log(), r.ratio()});
      worst[j] = std::max(worst[j], r.ratio());
      rep.C_emp = std::max(rep.C_emp, r.ratio());
    }
  }
  rep.s_min_emp = std::numeric_limits<double>::infinity();
  for (std::size_t j = s_grid.size(); j-- > 0;) {
    if (!(worst[j] <= C_cap)) break;
    rep.s_min_emp = s_grid[j];
  }
  return rep;
}

SigmaGapReport sigma_gap_check(const WeightPlan& plan) {
  SigmaGapReport r;
  r.sigma0 = plan.sigma0;
  r.sigma1 = plan.sigma1;
  const CylinderGeometry fine = plan.geometry.refined();
  const SigmaValues s1 =
      compute_sigmas(plan.d, fine, plan.lambda, plan.alpha, plan.beta, plan.delta0, plan.D0());
  r.sigma0_refined = s1.sigma0;
  r.sigma1_refined = s1.sigma1;
  r.strict = plan.sigma1 < plan.sigma0 && s1.sigma1 < s1.sigma0;
  if (!r.strict) {
    throw WeightError("sigma_gap", "weight gap closes under grid refinement; plan rejected");
  }
  r.gap_ratio = plan.sigma0 / plan.sigma1;
  const SigmaValues s2 = compute_sigmas(plan.d, plan.geometry, 2.0 * plan.lambda, plan.alpha,
                                        plan.beta, plan.delta0, plan.D0());
  r.gap_ratio_2lambda = s2.sigma0 / s2.sigma1;
  return r;
}

}  // namespace clab
