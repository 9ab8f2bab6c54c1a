// Copyright 2026 The uavh Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     https://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Acceptance run: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (0 when all pass).
//
//   acceptance [--only 1,4,...] [--realizations N]
//
// --realizations lowers the Monte-Carlo scale of criteria 6 and 7 for quick
// local runs; such runs are marked "reduced scale" and cannot pass those two.

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "common/oracles.hpp"
#include "uavh/channel.hpp"
#include "uavh/citygen.hpp"
#include "uavh/harness.hpp"
#include "uavh/offline.hpp"
#include "uavh/online.hpp"

using namespace uavh;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

double elapsed_s(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

constexpr int kFullRealizations = 100;

// ---------------------------------------------------------------------------
// 1. Closed-form rates at 50 m with a 60 dB reference SNR.
Outcome numeric_example() {
  ChannelParams p = ChannelParams::urban(1);
  p.beta0 = db_to_linear(-60.0);
  p.mu = db_to_linear(-20.0);
  p.alpha_los = 2.5;
  p.alpha_nlos = 3.5;
  const double snr = db_to_linear(60.0), d = 50.0;
  const double hl = linear_to_db(channel_gain(d, true, p));
  const double hn = linear_to_db(channel_gain(d, false, p));
  const double rl = rate_conditional(d, true, snr, p);
  const double rn = rate_conditional(d, false, snr, p);
  const double er = expected_rate_from(0.5, rl, rn);
  const double lb = expected_rate_lb_from(0.5, rl);
  const double jr = expected_rate_jensen_from(0.5, d, snr, p);
  struct Item {
    const char* name;
    double got, want, tol;
  };
  const Item items[] = {{"hL_dB", hl, -102.5, 0.1}, {"hN_dB", hn, -139.5, 0.1},
                        {"rL", rl, 5.85, 0.01},     {"rN", rn, 0.016, 0.01},
                        {"E[r]", er, 2.93, 0.01},   {"rL_bar", lb, 2.92, 0.01},
                        {"jensen", jr, 4.87, 0.01}};
  Outcome o{true, ""};
  for (const Item& it : items) {
    const bool ok = std::abs(it.got - it.want) <= it.tol;
    o.pass = o.pass && ok;
    o.detail += std::string(it.name) + "=" + fmt("%.4f", it.got) + (ok ? " " : "(!) ");
  }
  return o;
}

// 2. Finite-difference Hessians of psi are PSD.
Outcome psi_convexity() {
  std::mt19937_64 gen(20260101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 1000; ++i) {
    const double gamma = std::pow(10.0, 6.0 * u(gen));       // [1, 1e6]
    const double alpha = 2.0 + 4.0 * u(gen);                  // [2, 6]
    const double b3 = 0.999 * u(gen), b4 = 1.0 - b3;          // B3 >= 0
    const double x = 1.0 + 19.0 * u(gen);                     // 1 + exp(-phi)
    const double y = std::pow(10.0, 2.0 + 4.0 * u(gen));      // squared distance
    auto f = [&](double a, double b) { return psi(a, b, gamma, alpha, b3, b4); };
    const double hx = 1e-4 * x, hy = 1e-4 * y;
    Eigen::Matrix2d h;
    h(0, 0) = (f(x + hx, y) - 2.0 * f(x, y) + f(x - hx, y)) / (hx * hx);
    h(1, 1) = (f(x, y + hy) - 2.0 * f(x, y) + f(x, y - hy)) / (hy * hy);
    h(0, 1) = h(1, 0) = (f(x + hx, y + hy) - f(x + hx, y - hy) - f(x - hx, y + hy) +
                         f(x - hx, y - hy)) / (4.0 * hx * hy);
    worst = std::min(worst, Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(h).eigenvalues()(0));
  }
  return {worst >= -1e-6, "1000 points, min eigenvalue " + fmt("%.3e", worst)};
}

// 3. Surrogate rate and angle bounds.
Outcome bound_domination() {
  const ChannelParams p = ChannelParams::urban(1);
  const double snr = p.snr_ref(0);
  std::mt19937_64 gen(20260102);
  std::uniform_real_distribution<double> pos(0.0, 300.0), alt(50.0, 300.0);
  long violations = 0;
  double worst_excess = 0.0, worst_equality = 0.0;
  auto note = [&](double bound, double truth) {
    const double excess = bound - truth;
    if (excess > 1e-12 * std::max(1.0, std::abs(truth))) ++violations;
    worst_excess = std::max(worst_excess, excess);
  };
  auto equal = [&](double a, double b) {
    worst_equality = std::max(worst_equality, std::abs(a - b) / std::max(std::abs(b), 1e-300));
  };
  for (int e = 0; e < 100; ++e) {
    const Vec2 w{pos(gen), pos(gen)}, q_hat{pos(gen), pos(gen)};
    const double z = alt(gen);
    const SurrogateCoeffs c = horizontal_surrogate(q_hat, z, w, snr, p);
    const double d_hat = distance(q_hat, w);
    const double phi_hat = p.logistic.b1 + p.logistic.b2 * elevation_angle(q_hat, z, w);
    equal(surrogate_rate(c, phi_hat, d_hat * d_hat + z * z),
          expected_rate_lb(q_hat, z, w, snr, p));
    equal(surrogate_angle(c, d_hat), std::atan2(z, d_hat));
    equal(horizontal_surrogate_value(c, p.logistic, q_hat, w),
          expected_rate_lb(q_hat, z, w, snr, p));
    for (int s = 0; s < 10000; ++s) {
      const Vec2 q{pos(gen), pos(gen)};
      const double d = distance(q, w);
      const double truth = expected_rate_lb(q, z, w, snr, p);
      const double phi = p.logistic.b1 + p.logistic.b2 * elevation_angle(q, z, w);
      note(surrogate_rate(c, phi, d * d + z * z), truth);   // rate bound
      note(surrogate_angle(c, d), std::atan2(z, d));          // angle bound
      note(horizontal_surrogate_value(c, p.logistic, q, w), truth);  // composite
    }
  }
  const bool pass = violations == 0 && worst_equality <= 1e-12;
  return {pass, "3e6 checks, " + std::to_string(violations) + " violations, max excess " +
                    fmt("%.2e", worst_excess) + ", max rel. gap at expansion " +
                    fmt("%.2e", worst_equality)};
}

// Sensor layout shared by the single-mission criteria.
std::vector<Vec2> preset_sensors() { return sensor_layout(ExperimentConfig{}, 4); }

// 4. BCD on the short preset.
Outcome bcd_convergence() {
  const MissionConfig cfg = MissionConfig::preset(10.6);
  const OfflineSolution sol = bcd_optimize(cfg, preset_sensors(), ChannelParams::urban(4));
  bool monotone = true;
  for (std::size_t i = 1; i < sol.eta_trace.size(); ++i) {
    monotone = monotone && sol.eta_trace[i] >= sol.eta_trace[i - 1];
  }
  const double last_step = sol.eta_trace.size() >= 2
                               ? sol.eta_trace.back() - sol.eta_trace[sol.eta_trace.size() - 2]
                               : 0.0;
  std::string trace;
  for (double v : sol.eta_trace) trace += fmt("%.4f ", v);
  const bool pass = monotone && sol.converged && last_step < 0.001 && sol.iterations <= 30;
  return {pass, "N=" + std::to_string(cfg.n_slots) + ", " + std::to_string(sol.iterations) +
                    " iterations, trace " + trace + "(" + (monotone ? "monotone" : "NOT monotone") +
                    ")"};
}

// 5. Hovering structure at the long duration.
Outcome hovering_structure() {
  const MissionConfig cfg = MissionConfig::preset(25.6);
  const std::vector<Vec2> sn = preset_sensors();
  const OfflineSolution sol = bcd_optimize(cfg, sn, ChannelParams::urban(4));
  bool pass = true;
  std::string detail;
  for (std::size_t k = 0; k < sn.size(); ++k) {
    int best = 0;
    for (int n = 1; n <= cfg.n_slots; ++n) {
      if (distance(sol.trajectory.q[n], sn[k]) < distance(sol.trajectory.q[best], sn[k])) best = n;
    }
    const double d = distance(sol.trajectory.q[best], sn[k]);
    const double dz = sol.trajectory.z[best] - cfg.h_min;
    const bool ok = d <= 5.0 && std::abs(dz) <= 2.0;
    pass = pass && ok;
    detail += "SN" + std::to_string(k) + " " + fmt("%.2f m", d) + " @ z=" +
              fmt("%.2f", sol.trajectory.z[best]) + (ok ? "; " : "(!); ");
  }
  return {pass, detail + "eta " + fmt("%.4f", sol.eta)};
}

// Shared Monte-Carlo run of criteria 6 and 7.
struct McRun {
  MonteCarloResult result;
  int realizations = 0;
  double seconds = 0.0;
};

const McRun& monte_carlo(int realizations) {
  static std::optional<McRun> run;
  if (!run) {
    ExperimentConfig cfg;  // K = 4, all schemes, six durations, fitted channel
    cfg.realizations = realizations;
    const auto start = std::chrono::steady_clock::now();
    run = McRun{run_monte_carlo(cfg), realizations, 0.0};
    run->seconds = elapsed_s(start);
  }
  return *run;
}

// 6. Ordering of the scheme means.
Outcome scheme_ordering(int realizations) {
  const McRun& mc = monte_carlo(realizations);
  std::map<std::pair<double, std::string>, Aggregate> agg;
  std::set<double> durations;
  for (const Aggregate& a : mc.result.aggregates) {
    agg[{a.duration, a.scheme}] = a;
    durations.insert(a.duration);
  }
  const std::vector<std::pair<std::string, std::string>> chains{
      {"OJA", "JA"}, {"JA", "ACS"}, {"ACS", "PLB"}, {"PLB", "PLLA"}, {"PLLA", "LB"}};
  const std::vector<std::string> flying{"PLB", "ACS", "JA", "OJA", "PLLA", "LB"};
  bool pass = true;
  std::string detail;
  double worst_z = std::numeric_limits<double>::infinity();
  std::string worst_pair;
  for (double t0 : durations) {
    for (const auto& [hi, lo] : chains) {
      const Aggregate& a = agg.at({t0, hi});
      const Aggregate& b = agg.at({t0, lo});
      const double se = std::hypot(a.stderr_mean, b.stderr_mean);
      const double z = se > 0.0 ? (a.mean - b.mean) / se : (a.mean >= b.mean ? 0.0 : -1e9);
      if (z < worst_z) worst_z = z, worst_pair = hi + ">=" + lo + "@" + fmt("%.1f", t0);
      if (z < -2.0) pass = false;
    }
    const double st = agg.at({t0, "STATIC"}).mean;
    for (const std::string& s : flying) {
      if (!(st < agg.at({t0, s}).mean)) {
        pass = false;
        detail += "STATIC not below " + s + "@" + fmt("%.1f", t0) + "; ";
      }
    }
  }
  for (double t0 : {*durations.begin(), *durations.rbegin()}) {
    detail += "T0=" + fmt("%.1f", t0) + ":";
    for (const char* s : {"OJA", "JA", "ACS", "PLB", "PLLA", "LB", "STATIC"}) {
      detail += std::string(" ") + s + "=" + fmt("%.3f", agg.at({t0, s}).mean);
    }
    detail += "; ";
  }
  detail += "worst gap " + worst_pair + " = " + fmt("%.2f", worst_z) + " SE; " +
            std::to_string(mc.realizations) + " cities x " + std::to_string(durations.size()) +
            " durations in " + fmt("%.0f s", mc.seconds);
  const bool full = mc.realizations >= kFullRealizations;
  if (!full) detail += " (reduced scale)";
  return {pass && full && mc.seconds < 7200.0, detail};
}

// 7. Dominance on every realization.
Outcome per_realization_dominance(int realizations) {
  const McRun& mc = monte_carlo(realizations);
  std::map<std::tuple<double, int, std::string>, double> rate;
  for (const ResultRow& r : mc.result.rows) rate[{r.duration, r.realization, r.scheme}] = r.min_rate;
  const std::vector<std::pair<std::string, std::string>> chains{
      {"OJA", "JA"}, {"JA", "ACS"}, {"ACS", "PLB"}};
  std::map<std::string, int> violations;
  std::map<std::string, double> worst;
  int cases = 0;
  for (const auto& [key, v] : rate) {
    const auto& [t0, i, scheme] = key;
    if (scheme != "OJA") continue;
    ++cases;
    for (const auto& [hi, lo] : chains) {
      const double a = rate.at({t0, i, hi}), b = rate.at({t0, i, lo});
      const std::string name = hi + ">=" + lo;
      if (a < b - 1e-7 * std::max(1.0, b)) ++violations[name];
      worst[name] = std::min(worst[name], a - b);
    }
    (void)v;
  }
  bool pass = mc.realizations >= kFullRealizations;
  std::string detail;
  for (const auto& [hi, lo] : chains) {
    const std::string name = hi + ">=" + lo;
    pass = pass && violations[name] == 0;
    detail += name + ": " + std::to_string(violations[name]) + "/" + std::to_string(cases) +
              " violated (worst " + fmt("%.4f", worst[name]) + "); ";
  }
  if (mc.realizations < kFullRealizations) detail += "(reduced scale)";
  return {pass, detail};
}

// 8. LP solutions against exhaustive oracles.
Outcome lp_oracles() {
  std::mt19937_64 gen(20260108);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 1 + static_cast<int>(gen() % 2), n = 1 + static_cast<int>(gen() % 4);
    // Scheduling LP.
    Eigen::MatrixXd r(k, n);
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < n; ++j) r(i, j) = u(gen) < 0.15 ? 0.0 : 6.0 * u(gen);
    }
    worst = std::max(worst, std::abs(optimize_scheduling(r).eta - testing::slot_sharing_oracle(r)));

    // Online step LP (variable durations), current column realized.
    const ChannelParams p = ChannelParams::urban(k);
    std::vector<PathSegment> segs(n);
    std::vector<double> t_hat(n), r_ac;
    double need = 0.0;
    for (int j = 0; j < n; ++j) {
      segs[j].index = j;
      segs[j].t_hat = t_hat[j] = 0.2 * u(gen);
      need += t_hat[j];
      for (int i = 0; i < k; ++i) {
        segs[j].expected_rates.push_back(4.0 * u(gen));
        segs[j].distances.push_back(50.0 + 200.0 * u(gen));
      }
    }
    OnlineState st;
    st.t_remaining = need + u(gen);
    for (int i = 0; i < k; ++i) {
      r_ac.push_back(3.0 * u(gen));
      st.c.push_back(u(gen) < 0.5 ? 1 : 0);
    }
    st.r_ac = r_ac;
    Eigen::MatrixXd window(k, n);
    const std::vector<double> now = realized_rates(segs[0], st.c, p);
    for (int i = 0; i < k; ++i) {
      window(i, 0) = now[i];
      for (int j = 1; j < n; ++j) window(i, j) = segs[j].expected_rates[i];
    }
    const double t0 = 10.0;
    const double ja = solve_online_step(st, segs, Policy::kJa, p, t0, 0.2).eta;
    worst = std::max(worst, std::abs(ja - testing::variable_duration_oracle(
                                               r_ac, window, t_hat, st.t_remaining, t0)));
    const double full = solve_full_lp(window, t_hat, t0).eta;
    worst = std::max(worst, std::abs(full - testing::variable_duration_oracle(
                                                 std::vector<double>(k, 0.0), window, t_hat,
                                                 t0, t0)));
  }
  return {worst <= 1e-6, "50 instances x 3 LPs (K<=2, N<=4), max |LP - oracle| " +
                             fmt("%.2e", worst)};
}

// 9. Conservation on episodes of every policy.
Outcome conservation() {
  ExperimentConfig cfg;
  cfg.fit_channel = false;
  const std::vector<Vec2> sn = sensor_layout(cfg, 4);
  const ChannelParams p = ChannelParams::urban(4);
  int episodes = 0;
  double worst_budget = 0.0;
  std::string failure;
  for (double t0 : cfg.durations) {
    const OfflineSolution sol = bcd_optimize(mission_for_duration(cfg.mission, t0), sn, p);
    std::vector<double> t_hat;
    for (const PathSegment& s : build_path(sol, p)) t_hat.push_back(s.t_hat);
    for (int i = 0; i < 8; ++i) {
      const CityRealization city = realization_city(cfg, sn, i);
      for (Policy pol : {Policy::kPlb, Policy::kAcs, Policy::kJa, Policy::kOja}) {
        for (bool iid : {false, true}) {
          EpisodeOptions opts;
          opts.iid_states = iid;
          opts.iid_seed = derive_seed(city.rng_seed, 1);
          const EpisodeResult ep = run_episode(sol, city, pol, p, opts);
          ++episodes;
          double used = 0.0;
          for (double t : ep.durations) used += t;
          worst_budget = std::max(worst_budget, used - t0);
          try {
            check_episode(ep, t0, t_hat, 1e-7);
          } catch (const InvariantViolation& e) {
            if (failure.empty()) failure = e.what();
          }
        }
      }
    }
  }
  const bool pass = failure.empty() && worst_budget <= 1e-7;
  return {pass, std::to_string(episodes) + " episodes (4 policies, ray-traced and i.i.d. states)" +
                    ", max sum(t) - T0 = " + fmt("%.2e s", worst_budget) +
                    (failure.empty() ? "" : "; first violation: " + failure)};
}

// 10. Online decision time per waypoint.
Outcome online_timing() {
  ExperimentConfig cfg;
  cfg.fit_channel = false;
  const std::vector<Vec2> sn = sensor_layout(cfg, 4);
  const ChannelParams p = ChannelParams::urban(4);
  const MissionConfig m = mission_for_duration(cfg.mission, 20.0);  // N = 100
  const OfflineSolution sol = bcd_optimize(m, sn, p);
  const int n = m.n_slots;
  std::vector<std::vector<double>> samples(n);
  for (int i = 0; i < 5; ++i) {
    const EpisodeResult ep = run_episode(sol, realization_city(cfg, sn, i), Policy::kJa, p);
    for (int s = 0; s < n; ++s) samples[s].push_back(ep.wall_times_s[s]);
  }
  std::vector<double> median(n);
  double slowest = 0.0;
  for (int s = 0; s < n; ++s) {
    std::sort(samples[s].begin(), samples[s].end());
    median[s] = samples[s][samples[s].size() / 2];
    slowest = std::max(slowest, samples[s].back());
  }
  auto mean_of = [&](int from, int to) {
    double acc = 0.0;
    for (int s = from; s < to; ++s) acc += median[s];
    return acc / (to - from);
  };
  const double first = mean_of(0, n / 3), last = mean_of(n - n / 3, n);
  // Least-squares slope of the median time against the segment index.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int s = 0; s < n; ++s) sx += s, sy += median[s], sxx += double(s) * s, sxy += s * median[s];
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const bool pass = first > last && slope < 0.0 && slowest < 2.0;
  return {pass, "N=" + std::to_string(n) + ", median time first third " + fmt("%.2e s", first) +
                    ", last third " + fmt("%.2e s", last) + ", slope " + fmt("%.2e s/segment", slope) +
                    ", slowest " + fmt("%.2e s", slowest)};
}

// 11. Logistic fit quality.
Outcome fit_quality() {
  const LosSampleTable table = sample_los_probability(CityParams{}, 200, 11);
  const LogisticFit fit = fit_logistic(table);
  const LogisticParams truth{-0.6, 0.055, 0.1, 0.9};
  LosSampleTable synthetic;
  for (double th = 5.0; th <= 90.0; th += 5.0) {
    synthetic.rows.push_back({th, los_probability(th, truth), 1000});
  }
  const LogisticFit back = fit_logistic(synthetic);
  const double err = std::max({std::abs(back.params.b1 - truth.b1), std::abs(back.params.b2 - truth.b2),
                               std::abs(back.params.b3 - truth.b3),
                               std::abs(back.params.b4 - truth.b4)});
  const bool pass = fit.r_squared >= 0.98 && err <= 1e-4;
  return {pass, "200-city R^2 " + fmt("%.4f", fit.r_squared) + " (B = " + fmt("%.4f", fit.params.b1) +
                    ", " + fmt("%.4f", fit.params.b2) + ", " + fmt("%.4f", fit.params.b3) + ", " +
                    fmt("%.4f", fit.params.b4) + "); synthetic round-trip max error " +
                    fmt("%.1e", err)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  int realizations = kFullRealizations;
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  app.add_option("--realizations", realizations, "Monte-Carlo cities for criteria 6-7")
      ->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  struct Criterion {
    int id;
    const char* title;
    double budget_s;  // runtime limit, 0 for none
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "closed-form rate example", 1.0, numeric_example},
      {2, "psi Hessian PSD", 10.0, psi_convexity},
      {3, "surrogate bounds dominated", 30.0, bound_domination},
      {4, "BCD monotone and converged", 600.0, bcd_convergence},
      {5, "long-duration hovering", 0.0, hovering_structure},
      {6, "scheme ordering (Monte-Carlo)", 7200.0, [&] { return scheme_ordering(realizations); }},
      {7, "per-realization dominance", 0.0, [&] { return per_realization_dominance(realizations); }},
      {8, "LP oracle equivalence", 60.0, lp_oracles},
      {9, "conservation suite", 0.0, conservation},
      {10, "online time per waypoint", 0.0, online_timing},
      {11, "channel fit quality", 300.0, fit_quality},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = elapsed_s(start);
    if (c.budget_s > 0.0 && secs >= c.budget_s) {
      o.pass = false;
      o.detail += " [over the " + fmt("%.0f s", c.budget_s) + " budget]";
    }
    if (!o.pass) ++failed;
    std::printf("criterion %2d %s  %-30s | %s | %.1f s\n", c.id, o.pass ? "PASS" : "FAIL", c.title,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed;
}
