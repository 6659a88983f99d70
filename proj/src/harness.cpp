#include "hsm/harness.hpp"

#include "hsm/counterexamples.hpp"
#include "hsm/errors.hpp"
#include "hsm/oscillatory.hpp"
#include "hsm/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <sstream>

namespace hsm {

namespace {

constexpr double kGroupTolerance = 1e-12;
constexpr double kDetIdentityTolerance = 1e-8;
constexpr double kFoldDetTolerance = 1e-10;
constexpr double kBlockTolerance = 1e-6;
constexpr double kCBoundSlack = 1e-8;
constexpr double kTransversalFloor = 1e-6;
constexpr double kLemmaTolerance = 1e-10;

std::string header(const std::string& line) { return "# schema=1\n# " + line + "\n"; }

std::string structure_label(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "structure=" << cfg.structure << " n=" << cfg.n << " m=" << cfg.m
      << " lambda=" << (cfg.lambda.empty() ? "0" : "custom");
  return out.str();
}

// Largest entrywise difference of two group points relative to their size.
double point_error(const GroupPoint& a, const GroupPoint& b) {
  double scale = 1.0, diff = 0.0;
  for (Eigen::Index k = 0; k < a.ubar.size(); ++k) {
    scale = std::max(scale, std::abs(a.ubar(k)));
    diff = std::max(diff, std::abs(a.ubar(k) - b.ubar(k)));
  }
  for (Eigen::Index i = 0; i < a.bar.size(); ++i) {
    scale = std::max(scale, std::abs(a.bar(i)));
    diff = std::max(diff, std::abs(a.bar(i) - b.bar(i)));
  }
  return diff / scale;
}

GroupPoint random_point(const MetivierStructure& s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  GroupPoint x{Vec(2 * s.n()), Vec(s.m())};
  for (Eigen::Index k = 0; k < x.ubar.size(); ++k) x.ubar(k) = uni(rng);
  for (Eigen::Index i = 0; i < x.bar.size(); ++i) x.bar(i) = uni(rng);
  return x;
}

struct CheckRow {
  std::string name;
  std::size_t samples;
  double error;
  double tolerance;
  std::string status;
};

std::string join(const Vec& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += ' ';
    out += format_number(v(i));
  }
  return out;
}

}  // namespace

CommandResult run_group_check(const ExperimentConfig& cfg) {
  const MetivierStructure s = make_structure(cfg);
  std::mt19937_64 rng(cfg.seed);
  const std::size_t count = static_cast<std::size_t>(cfg.samples);
  const GroupPoint e = identity_point(s);
  double assoc = 0.0, ident = 0.0, inv = 0.0, dil = 0.0;
  std::uniform_real_distribution<double> tdist(0.25, 4.0);
  for (std::size_t k = 0; k < count; ++k) {
    const GroupPoint x = random_point(s, rng), y = random_point(s, rng), z = random_point(s, rng);
    assoc = std::max(assoc, point_error(group_multiply(s, group_multiply(s, x, y), z),
                                        group_multiply(s, x, group_multiply(s, y, z))));
    ident = std::max({ident, point_error(group_multiply(s, x, e), x), point_error(group_multiply(s, e, x), x)});
    const GroupPoint xi = group_inverse(s, x);
    inv = std::max({inv, point_error(group_multiply(s, x, xi), e), point_error(group_multiply(s, xi, x), e)});
    const double t = tdist(rng);
    dil = std::max(dil, point_error(dilate(s, t, group_multiply(s, x, y)),
                                    group_multiply(s, dilate(s, t, x), dilate(s, t, y))));
  }
  double skew = 0.0;
  for (const Mat& Ji : s.Js()) skew = std::max(skew, skew_defect(Ji));
  // (J^th)^2 = -kappa |th|^2 I with kappa fixed by J_1.
  const double kappa = std::pow(spectral_norm(s.J(0)), 2);
  double htype = 0.0;
  std::normal_distribution<double> normal;
  const int n2 = 2 * s.n();
  for (int k = 0; k < 100; ++k) {
    Vec th(s.m());
    for (int i = 0; i < s.m(); ++i) th(i) = normal(rng);
    const Mat Jt = s.J_theta(th);
    htype = std::max(htype, spectral_norm(Jt * Jt + kappa * th.squaredNorm() * Mat::Identity(n2, n2)));
  }
  const MarginReport margin = smallness_margin(s, cfg.margin_grid);

  auto status = [](double err, double tol) { return err <= tol ? std::string("pass") : std::string("fail"); };
  std::vector<CheckRow> rows{
      {"associativity", count, assoc, kGroupTolerance, status(assoc, kGroupTolerance)},
      {"identity", count, ident, kGroupTolerance, status(ident, kGroupTolerance)},
      {"inverse", count, inv, kGroupTolerance, status(inv, kGroupTolerance)},
      {"dilation_automorphism", count, dil, kGroupTolerance, status(dil, kGroupTolerance)},
      {"skew_symmetry", s.Js().size(), skew, 0.0, status(skew, 0.0)},
      {"htype_identity", 100, htype, kGroupTolerance, status(htype, kGroupTolerance)},
      {"nondegeneracy", margin.grid_size, margin.min_sigma_j, 0.0, margin.nondegenerate ? "pass" : "fail"},
      {"smallness_margin", margin.grid_size, margin.margin, 0.0, margin.margin > 0.0 ? "pass" : "warning"},
  };
  CommandResult result;
  std::ostringstream out;
  out << header("group-check " + structure_label(cfg) + " seed=" + std::to_string(cfg.seed));
  out << "check,samples,value,tolerance,status\n";
  for (const CheckRow& r : rows) {
    out << r.name << "," << r.samples << "," << format_number(r.error) << "," << format_number(r.tolerance) << ","
        << r.status << "\n";
    // The H-type identity is a property of H-type structures only.
    const bool advisory = r.name == "htype_identity" && cfg.structure != "quaternionic";
    if (r.status == "fail" && !advisory) result.exit_code = kExitFailure;
  }
  out << "# radon_hurwitz(2n)=" << radon_hurwitz(2 * cfg.n) << " m_admissible=" << (cfg.m < radon_hurwitz(2 * cfg.n) ? "yes" : "no")
      << "\n";
  if (margin.margin <= 0.0) result.diagnostics += "warning: smallness margin is not positive; Lambda is too large\n";
  result.output = out.str();
  return result;
}

namespace {

struct GeometryRow {
  std::string line;
  bool deviation = false;
  double sv_ratio = 0.0;
  double curv_ratio = 0.0;
};

std::string geometry_line(const std::string& kind, std::size_t index, const ChartPoint& p, double sigma,
                          const std::vector<std::string>& fields, bool deviation) {
  std::ostringstream out;
  out << kind << "," << index << "," << join(p.x) << "," << format_number(p.t) << "," << join(p.y) << ","
      << format_number(sigma);
  for (const std::string& f : fields) out << "," << f;
  out << "," << (deviation ? "deviation" : "ok") << "\n";
  return out.str();
}

GeometryRow geometry_point(const PhaseModel& pm, const std::string& kind, std::size_t index, const ChartPoint& p) {
  const int d = pm.d();
  const bool fold = kind == "fold" || kind == "fold_diagonal";
  const bool diagonal = kind == "diagonal" || kind == "fold_diagonal";
  GeometryRow row;
  const double sigma = sigma_value(pm, p.x, p.t, p.y);
  const HessianRank hr = mixed_hessian_rank(pm, p.x, p.t, p.y);
  row.sv_ratio = hr.full.singular_values.back() / hr.full.singular_values.front();
  bool dev = hr.full.rank != d;
  const double det_pi = pi_xi_y_det(pm, p.x, p.t, p.y);
  const double det_red = reduced_det(pm, p.x, p.t, p.y);
  double det_err = 0.0;
  if (fold) {
    det_err = std::abs(det_pi - det_red);
    dev = dev || hr.spatial.rank != d - 1 || std::abs(det_pi) > kFoldDetTolerance;
  } else {
    det_err = std::abs(det_pi - det_red) / std::abs(det_red);
    dev = dev || !(det_err <= kDetIdentityTolerance);
  }
  std::string rank_curv, c_val, c_bnd, block, rank_cone, left, right;
  if (diagonal && !fold && !dev) {
    const CurvatureReport r = certify_point(pm, p);
    const CurvatureMatrix cm = curvature_matrix(pm, p.x, p.t, p.y, r.normal);
    const double berr = (cm.matrix - curvature_block_form(pm, p.x, p.t, p.y, r.normal)).cwiseAbs().maxCoeff();
    row.curv_ratio = r.singular_values_curv[static_cast<std::size_t>(d - 2)] / r.singular_values_curv.front();
    rank_curv = std::to_string(r.rank_curv);
    c_val = format_number(r.c_value);
    c_bnd = format_number(r.c_bound);
    block = format_number(berr);
    dev = dev || r.rank_curv != d - 1 || std::abs(r.c_value) < r.c_bound - kCBoundSlack || berr > kBlockTolerance;
  }
  if (fold && !dev) {
    try {
      const int k = 2 * pm.n() - 1;
      const FoldCone fc = fold_cone_curvature(pm, p.x, p.t, p.y.head(k), p.y.tail(pm.m()));
      rank_cone = std::to_string(fc.rank.rank);
      dev = dev || fc.rank.rank != d - 2;
      if (diagonal) {
        const double berr = (fc.curvature - fc.block_form).cwiseAbs().maxCoeff();
        block = format_number(berr);
        const FoldTransversality tr = fold_transversality(pm, p.x, p.t, p.y);
        left = format_number(tr.left);
        right = format_number(tr.right);
        dev = dev || berr > kBlockTolerance || std::abs(tr.left) <= kTransversalFloor ||
              std::abs(tr.right) <= kTransversalFloor;
      }
    } catch (const DegenerateInputError&) {
      dev = true;
    }
  }
  row.deviation = dev;
  row.line = geometry_line(kind, index, p, sigma,
                           {std::to_string(hr.full.rank), std::to_string(hr.spatial.rank), rank_curv, rank_cone,
                            format_number(row.sv_ratio), format_number(det_pi), format_number(det_err), c_val, c_bnd,
                            block, left, right},
                           dev);
  return row;
}

}  // namespace

CommandResult run_geometry(const ExperimentConfig& cfg) {
  const MetivierStructure s = make_structure(cfg);
  const MarginReport margin = smallness_margin(s, cfg.margin_grid);
  const bool certified = margin.margin > 0.0 && margin.nondegenerate;
  const PhaseModel pm(s);
  ChartSampler sampler(pm, cfg.seed);
  std::vector<std::pair<std::string, ChartPoint>> points;
  for (int i = 0; i < cfg.points; ++i) points.emplace_back("generic", sampler.generic());
  for (int i = 0; i < cfg.points; ++i) points.emplace_back("diagonal", sampler.diagonal());
  for (int i = 0; i < cfg.fold_points; ++i) points.emplace_back("fold", sampler.fold());
  for (int i = 0; i < cfg.fold_points; ++i) points.emplace_back("fold_diagonal", sampler.diagonal_fold());
  const std::vector<GeometryRow> rows = parallel_map(points.size(), [&](std::size_t i) {
    return geometry_point(pm, points[i].first, i, points[i].second);
  });
  CommandResult result;
  std::ostringstream out;
  out << header("geometry " + structure_label(cfg) + " seed=" + std::to_string(cfg.seed));
  out << "# margin=" << format_number(margin.margin) << " nondegenerate=" << (margin.nondegenerate ? "yes" : "no")
      << " rank_tolerance=" << format_number(kRankTolerance) << "\n";
  out << "kind,index,x,t,y,sigma,rank_xi,rank_pi,rank_curv,rank_cone,sv_ratio_xi,det_pi,det_identity_error,"
         "c_value,c_bound,block_error,fold_left,fold_right,status\n";
  std::size_t deviations = 0;
  double min_sv = 1.0, min_curv = 1.0;
  for (const GeometryRow& r : rows) {
    out << r.line;
    if (r.deviation) ++deviations;
    min_sv = std::min(min_sv, r.sv_ratio);
    if (r.curv_ratio > 0.0) min_curv = std::min(min_curv, r.curv_ratio);
  }
  out << "# summary points=" << rows.size() << " deviations=" << deviations
      << " min_sv_ratio_xi=" << format_number(min_sv) << " min_curvature_sv_ratio=" << format_number(min_curv)
      << " status=" << (certified ? "certified" : "uncertified") << "\n";
  if (certified && deviations > 0) result.exit_code = kExitFailure;
  if (!certified) result.diagnostics += "warning: smallness margin is not positive, deviations are reported only\n";
  result.output = out.str();
  return result;
}

CommandResult run_counterexample(const ExperimentConfig& cfg) {
  const Family family = parse_family(cfg.family);
  const MetivierStructure s = make_structure(cfg);
  ExampleOptions opt = example_options(cfg);
  opt.time_grid = cfg.tgrid;
  CommandResult result;
  std::ostringstream out;
  if (family == Family::SteinDensity) {
    if (cfg.m != 1 || cfg.n > 2) throw ConfigError("stein family needs m = 1 and n in {1, 2}");
    const double inv_p2 = (2.0 * cfg.n - 1.0) / (2.0 * cfg.n);
    if (!(cfg.alpha > inv_p2 && cfg.alpha < 1.0)) throw ConfigError("alpha must lie in ((2n-1)/(2n), 1)");
    const SteinDiagnostic diag = stein_divergence(s, cfg.alpha, cfg.stein_j_min, cfg.stein_j_max, opt);
    out << stein_csv(diag);
    const bool pass = diag.monotone && std::abs(diag.growth_exponent - diag.expected_growth) <= cfg.stein_tolerance;
    out << "# verdict growth=" << format_number(diag.growth_exponent) << " expected="
        << format_number(diag.expected_growth) << " tolerance=" << format_number(cfg.stein_tolerance)
        << " status=" << (pass ? "pass" : "fail") << "\n";
    if (!pass) result.exit_code = kExitFailure;
    result.output = out.str();
    return result;
  }
  if (cfg.n > 2) throw ConfigError("counterexample families are implemented for n in {1, 2}");
  if (family == Family::Knapp && cfg.m != 1) throw ConfigError("knapp family needs m = 1");
  if (family == Family::MomentCurve && (cfg.n != 1 || cfg.m != 1)) throw ConfigError("moment family needs n = m = 1");
  if (cfg.scales.size() < 3) throw ConfigError("a ladder needs at least 3 deltas");
  for (std::size_t i = 1; i < cfg.scales.size(); ++i) {
    if (!(cfg.scales[i] < cfg.scales[i - 1])) throw ConfigError("deltas must decrease strictly");
  }
  // The Knapp and moment families use the normalization J^2 = -I.
  MetivierStructure used = s;
  if (family == Family::Knapp || family == Family::MomentCurve) {
    if (cfg.structure != "heisenberg") throw ConfigError("knapp and moment families need the heisenberg structure");
    used = unit_heisenberg(cfg.n).with_lambda(s.Lambda());
    if (family == Family::MomentCurve && !cfg.lambda.empty()) throw ConfigError("moment family fixes lambda = 0");
  }
  const LadderResult ladder = run_ladder(family, used, cfg.p.value(), cfg.q.value(), cfg.scales, opt);
  out << ladder_csv(ladder);
  const Rational exact = predicted_exponent_exact(family, cfg.n, cfg.m, cfg.p.inverse, cfg.q.inverse);
  const bool pass = ladder.passes(cfg.tolerance);
  out << "# p=" << cfg.p.text() << " q=" << cfg.q.text() << " predicted_exact=" << to_string(exact) << "\n";
  out << "# verdict slope=" << format_number(ladder.fit.slope) << " predicted=" << format_number(ladder.predicted)
      << " tolerance=" << format_number(cfg.tolerance) << " r_squared=" << format_number(ladder.fit.r_squared)
      << " status=" << (pass ? "pass" : "fail") << "\n";
  if (!pass) result.exit_code = kExitFailure;
  result.output = out.str();
  return result;
}

CommandResult run_region(const ExperimentConfig& cfg, ExportFormat format) {
  Region region;
  try {
    region = cfg.region_kind == "maximal" ? maximal_region(cfg.n, cfg.m) : averaging_region(cfg.n, cfg.m);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  CommandResult result;
  result.output = export_region(region, format);
  return result;
}

CommandResult run_lemma_check(const ExperimentConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<int> dim(2, 8);
  std::uniform_real_distribution<double> entry(-1.0, 1.0), rho_dist(-2.0, 2.0);
  struct Case {
    int N;
    double rho;
    Mat B;
  };
  std::vector<Case> cases;
  const std::size_t count = cfg.rho.empty() ? static_cast<std::size_t>(cfg.lemma_samples) : cfg.rho.size();
  for (std::size_t k = 0; k < count; ++k) {
    const int N = dim(rng);
    Mat A(N, N);
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j < N; ++j) A(i, j) = entry(rng);
    }
    double rho = 0.0;
    if (cfg.rho.empty()) {
      do rho = rho_dist(rng);
      while (rho == 0.0);
    } else {
      rho = cfg.rho[k];
    }
    cases.push_back({N, rho, A - A.transpose()});
  }
  struct Outcome {
    std::string line;
    double error = 0.0;
    bool odd_ok = true;
    bool fail = false;
  };
  const std::vector<Outcome> outcomes = parallel_map(cases.size(), [&](std::size_t k) {
    const Case& c = cases[k];
    Outcome o;
    const std::optional<double> formula = skew_inverse_norm(c.rho, c.B);
    const Mat M = c.rho * Mat::Identity(c.N, c.N) + c.B;
    Eigen::FullPivLU<Mat> lu(M);
    std::ostringstream line;
    line << k << "," << c.N << "," << format_number(c.rho) << ",";
    if (!lu.isInvertible()) {
      o.fail = formula.has_value();
      line << (formula ? format_number(*formula) : "singular") << ",singular,,";
    } else {
      const double brute = spectral_norm(lu.inverse());
      o.error = formula ? std::abs(*formula - brute) / brute : std::numeric_limits<double>::infinity();
      o.fail = !(o.error <= kLemmaTolerance);
      if (c.N % 2 == 1 && formula) o.odd_ok = *formula == 1.0 / std::abs(c.rho);
      line << (formula ? format_number(*formula) : "singular") << "," << format_number(brute) << ","
           << format_number(o.error);
    }
    line << "," << (o.fail || !o.odd_ok ? "fail" : "pass") << "\n";
    o.line = line.str();
    return o;
  });
  CommandResult result;
  std::ostringstream out;
  out << header("lemma-check seed=" + std::to_string(cfg.seed));
  out << "index,N,rho,formula,brute_force,relative_error,status\n";
  double worst = 0.0;
  std::size_t odd = 0, odd_ok = 0, failures = 0;
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    out << outcomes[k].line;
    worst = std::max(worst, outcomes[k].error);
    if (cases[k].N % 2 == 1) {
      ++odd;
      if (outcomes[k].odd_ok) ++odd_ok;
    }
    if (outcomes[k].fail || !outcomes[k].odd_ok) ++failures;
  }
  out << "# summary cases=" << outcomes.size() << " max_relative_error=" << format_number(worst)
      << " odd_cases=" << odd << " odd_inverse_rho=" << odd_ok << " failures=" << failures << "\n";
  if (failures > 0) result.exit_code = kExitFailure;
  result.output = out.str();
  return result;
}

}  // namespace hsm
