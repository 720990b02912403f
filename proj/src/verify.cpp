#include "etatest/verify.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "parallel.hpp"

namespace etatest {

double default_eq_tol(const Bounds& bounds) { return 1e-6 * diagonal(bounds); }

double radius(const Eigen::Ref<const Vec>& x_i, const Eigen::Ref<const Vec>& u_pi,
              const Eigen::Ref<const Vec>& x_j, const Eigen::Ref<const Vec>& u_j,
              const LipschitzEstimate& at_j) {
  return at_j.lx * (x_i - x_j).norm() + at_j.lu * (u_pi - u_j).norm();
}

std::vector<Ball> neighbor_balls(const Dataset& data, const NeighborIndex& index,
                                 const LipschitzField& field, const Vec& x, const Vec& u_pi,
                                 double delta, std::vector<std::size_t>* used) {
  if (field.size() != data.size()) throw Error("Lipschitz field does not cover the dataset");
  const auto near = index.query(x, u_pi, delta);
  std::vector<Ball> balls;
  balls.reserve(near.size());
  for (std::size_t j : near) {
    // A flagged entry carries no information about its neighborhood.
    if (field[j].unconstrained) continue;
    balls.push_back({data.y(j), radius(x, u_pi, data.x(j), data.u(j), field[j])});
    if (used) used->push_back(j);
  }
  return balls;
}

PointReport evaluate_state(const Dataset& data, const NeighborIndex& index, const Policy& policy,
                           const LyapunovFn& V, const LipschitzField& field, const Vec& x,
                           double delta, Mode mode, bool restore_feasibility) {
  PointReport rep;
  rep.x = x;
  rep.u_policy = policy(x);
  auto balls = neighbor_balls(data, index, field, x, rep.u_policy, delta);
  rep.neighbors = balls.size();
  if (balls.empty()) {
    rep.status = QclpStatus::Unbounded;
    return rep;
  }
  const Vec c = V.gradient(x);
  const bool want_max = mode == Mode::Stability || mode == Mode::Both;
  const bool want_min = mode == Mode::Instability || mode == Mode::Both;

  QclpResult r;
  if (restore_feasibility) {
    auto e = want_max ? elastic_max_linear(c, balls) : elastic_min_linear(c, balls);
    r = std::move(e.result);
    rep.slack = e.slack;
    if (rep.slack > 0.0) {
      for (auto& b : balls) b.radius += rep.slack;
    }
  } else {
    r = want_max ? max_linear(c, balls) : min_linear(c, balls);
  }
  rep.status = r.status;
  if (r.status != QclpStatus::Optimal) return rep;
  if (want_max) {
    rep.eta_max = r.value;
    if (want_min) {
      auto lower = min_linear(c, balls);
      if (lower.status == QclpStatus::Infeasible && restore_feasibility) {
        auto e = elastic_min_linear(c, balls);
        lower = std::move(e.result);
        rep.slack += e.slack;
      }
      rep.status = lower.status;
      if (lower.status == QclpStatus::Optimal) rep.eta_min = lower.value;
    }
  } else {
    rep.eta_min = r.value;
  }
  return rep;
}

namespace {

Vec equilibrium_of(const VerifyOptions& options, int n) {
  return options.equilibrium.size() == n ? options.equilibrium : Vec::Zero(n);
}

bool fails_single_mode(const PointReport& rep, Mode mode) {
  if (rep.exempt) return false;
  if (mode == Mode::Instability) return !(rep.eta_min && *rep.eta_min > 0.0);
  return !(rep.eta_max && *rep.eta_max < 0.0);
}

PointReport discrete_report(const Dataset& data, const NeighborIndex& index, const Policy& policy,
                            const LyapunovFn::Quadratic& q, const LipschitzField& field,
                            std::size_t i, double delta, bool restore_feasibility) {
  PointReport rep;
  rep.index = i;
  rep.x = data.x(i);
  rep.u_policy = policy(rep.x);
  auto balls = neighbor_balls(data, index, field, rep.x, rep.u_policy, delta);
  rep.neighbors = balls.size();
  if (balls.empty()) {
    rep.status = QclpStatus::Unbounded;
    return rep;
  }
  auto bound = max_quadratic_bound(q.P, balls, q.center);
  if (bound.status == QclpStatus::Infeasible && restore_feasibility) {
    rep.slack = feasibility_slack(balls);
    for (auto& b : balls) b.radius += rep.slack;
    bound = max_quadratic_bound(q.P, balls, q.center);
  }
  rep.status = bound.status;
  if (bound.status == QclpStatus::Optimal) {
    const Vec d = rep.x - q.center;
    rep.eta_max = bound.value - d.dot(q.P * d);
  }
  return rep;
}

Verdict finish(std::vector<PointReport> reports, const VerifyOptions& options) {
  Verdict v;
  v.epsilon_critical = options.epsilon_critical;
  v.reports = std::move(reports);
  v.counts = count(v.reports);
  for (const auto& r : v.reports) {
    if (r.unconstrained()) v.unconstrained.push_back(r.index);
  }
  v.overall = classify(v.reports, options.epsilon_critical, options.mode);
  return v;
}

void check_inputs(const Dataset& data, const Policy& policy, const LipschitzField& field,
                  const VerifyOptions& options) {
  if (!(options.delta > 0.0)) throw Error("delta must be positive");
  if (field.size() != data.size()) throw Error("Lipschitz field does not cover the dataset");
  if (policy.action_dim() != data.m()) throw Error("policy action dimension mismatch");
}

}  // namespace

Verdict eta_test(const Dataset& data, const NeighborIndex& index, const Policy& policy,
                 const LyapunovFn& V, const LipschitzField& field, const VerifyOptions& options) {
  if (options.mode == Mode::Discrete) {
    return eta_test_discrete(data, index, policy, V, field, options);
  }
  check_inputs(data, policy, field, options);
  const Vec eq = equilibrium_of(options, data.n());
  const auto count = data.size();

  auto evaluate = [&](std::size_t i) {
    PointReport rep = evaluate_state(data, index, policy, V, field, data.x(i), options.delta,
                                     options.mode, options.restore_feasibility);
    rep.index = i;
    rep.exempt = (rep.x - eq).norm() <= options.eq_tol;
    return rep;
  };

  std::vector<PointReport> reports;
  if (options.fail_fast && options.mode != Mode::Both) {
    for (std::size_t i = 0; i < count; ++i) {
      reports.push_back(evaluate(i));
      if (fails_single_mode(reports.back(), options.mode)) break;
    }
  } else {
    reports.resize(count);
    detail::parallel_for(static_cast<std::int64_t>(count), options.threads,
                         [&](std::int64_t i) { reports[i] = evaluate(static_cast<std::size_t>(i)); });
  }
  return finish(std::move(reports), options);
}

Verdict eta_test_discrete(const Dataset& data, const NeighborIndex& index, const Policy& policy,
                          const LyapunovFn& V, const LipschitzField& field,
                          const VerifyOptions& options) {
  if (data.time_kind() != TimeKind::Discrete) throw Error("discrete test needs discrete-time data");
  const auto* q = std::get_if<LyapunovFn::Quadratic>(&V.kind());
  if (!q) throw Error("discrete test needs a quadratic Lyapunov function");
  check_inputs(data, policy, field, options);
  const Vec eq = equilibrium_of(options, data.n());
  VerifyOptions opts = options;
  opts.mode = Mode::Discrete;

  std::vector<PointReport> reports(data.size());
  detail::parallel_for(static_cast<std::int64_t>(data.size()), options.threads, [&](std::int64_t i) {
    auto rep = discrete_report(data, index, policy, *q, field, static_cast<std::size_t>(i),
                               options.delta, options.restore_feasibility);
    rep.exempt = (rep.x - eq).norm() <= options.eq_tol;
    reports[i] = std::move(rep);
  });
  if (opts.fail_fast) {
    auto first = std::find_if(reports.begin(), reports.end(),
                              [](const PointReport& r) { return fails_single_mode(r, Mode::Discrete); });
    if (first != reports.end()) reports.erase(first + 1, reports.end());
  }
  return finish(std::move(reports), opts);
}

VerdictCounts count(std::span<const PointReport> reports) {
  VerdictCounts c;
  c.points = reports.size();
  for (const auto& r : reports) {
    if (r.exempt) ++c.exempt;
    if (r.unconstrained()) ++c.unconstrained;
    if (r.status == QclpStatus::Infeasible) ++c.infeasible;
    if (r.slack > 0.0) ++c.restored;
    if (r.eta_max && *r.eta_max < 0.0) ++c.eta_max_negative;
    if (r.eta_min && *r.eta_min > 0.0) ++c.eta_min_positive;
  }
  return c;
}

Outcome classify(std::span<const PointReport> reports, double epsilon_critical, Mode mode) {
  bool any = false;
  bool stable = true;
  bool unstable = true;
  bool near = true;
  for (const auto& r : reports) {
    if (r.exempt) continue;
    any = true;
    stable = stable && r.eta_max && *r.eta_max < 0.0;
    unstable = unstable && r.eta_min && *r.eta_min > 0.0;
    near = near && r.eta_max && r.eta_min && *r.eta_max >= 0.0 && *r.eta_min <= 0.0 &&
           std::max(std::abs(*r.eta_max), std::abs(*r.eta_min)) <= epsilon_critical;
  }
  if (!any) return Outcome::Indeterminate;
  switch (mode) {
    case Mode::Stability:
    case Mode::Discrete:
      return stable ? Outcome::Stable : Outcome::Indeterminate;
    case Mode::Instability:
      return unstable ? Outcome::Unstable : Outcome::Indeterminate;
    case Mode::Both:
      if (stable) return Outcome::Stable;
      if (unstable) return Outcome::Unstable;
      return near ? Outcome::NearCritical : Outcome::Indeterminate;
  }
  return Outcome::Indeterminate;
}

void attach_true_vdot(Verdict& verdict, const SystemSpec& system, const Policy& policy,
                      const LyapunovFn& V) {
  for (auto& r : verdict.reports) {
    if (system.time_kind() == TimeKind::Discrete) {
      r.true_vdot = V.value(system(r.x, policy(r.x))) - V.value(r.x);
    } else {
      r.true_vdot = true_vdot(system, policy, V, r.x);
    }
  }
}

namespace reference {

Verdict eta_test(const Dataset& data, const NeighborIndex& index, const Policy& policy,
                 const LyapunovFn& V, const LipschitzField& field, const VerifyOptions& options) {
  if (options.mode == Mode::Discrete) throw Error("reference::eta_test is continuous-time only");
  check_inputs(data, policy, field, options);
  const Vec eq = equilibrium_of(options, data.n());
  std::vector<PointReport> reports;
  reports.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    PointReport rep = evaluate_state(data, index, policy, V, field, data.x(i), options.delta,
                                     options.mode, options.restore_feasibility);
    rep.index = i;
    rep.exempt = (rep.x - eq).norm() <= options.eq_tol;
    reports.push_back(std::move(rep));
  }
  return finish(std::move(reports), options);
}

}  // namespace reference

}  // namespace etatest
