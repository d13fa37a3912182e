#include <cmath>
#include <sstream>

#include "taylornet/measure.hpp"
#include "taylornet/parallel.hpp"

namespace taylornet {

std::vector<double> ScanReport::means(const std::string& statistic) const {
  std::vector<double> out;
  for (const auto& r : rows)
    if (r.statistic == statistic) out.push_back(r.mean);
  return out;
}

namespace {

constexpr int kProbesPerTrial = 16;

Vector unit_direction(int d, Rng& rng) { return sphere_point(d, 1.0, rng); }

// values[w][t][s]: per width, trial and statistic
ScanReport assemble(const std::vector<int>& widths, const std::vector<std::string>& stats,
                    const std::vector<std::vector<std::vector<double>>>& values) {
  ScanReport rep;
  rep.statistics = stats;
  for (size_t s = 0; s < stats.size(); ++s) {
    std::vector<double> xs, ys;
    for (size_t w = 0; w < widths.size(); ++w) {
      std::vector<double> v;
      for (const auto& trial : values[w]) v.push_back(trial[s]);
      const MeanStd ms = mean_std(v);
      rep.rows.push_back({widths[w], stats[s], ms.mean, ms.std, static_cast<int>(v.size())});
      xs.push_back(widths[w]);
      ys.push_back(std::abs(ms.mean));
    }
    bool positive = true;
    for (double y : ys) positive = positive && y > 0.0;
    const bool signed_stat = stats[s].size() > 7 && stats[s].ends_with("_signed");
    if (positive && !signed_stat && xs.size() >= 3) rep.slopes[stats[s]] = fit_loglog_slope(xs, ys);
  }
  return rep;
}

void check_widths(const std::vector<int>& widths) {
  if (widths.size() < 4) throw std::invalid_argument("scan: need at least 4 widths");
  for (int m : widths)
    if (m < 2 || m % 2 != 0) throw std::invalid_argument("scan: widths must be even and >= 2");
}

}  // namespace

ScanReport coupling_scan(int d, double bx, const std::vector<int>& widths, ColNormRule rule, int trials,
                         std::uint64_t seed, int threads) {
  check_widths(widths);
  if (trials < 2) throw std::invalid_argument("coupling_scan: trials must be >= 2");
  const std::vector<std::string> stats = {"abs_flin", "flin_sq", "abs_quad_remainder", "abs_fquad", "flin_signed",
                                          "abs_quad_remainder_worst"};
  std::vector<std::vector<std::vector<double>>> values(widths.size(),
                                                       std::vector<std::vector<double>>(trials));
  const int jobs = static_cast<int>(widths.size()) * trials;
  parallel_for(jobs, threads, [&](int job) {
    const int wi = job / trials;
    const int t = job % trials;
    const int m = widths[wi];
    Rng rng(child_seed(seed, static_cast<std::uint64_t>(wi) * 1000003ULL + t));
    const Network net = init_symmetric(d, m, bx, rng());
    const int h = m / 2;
    const double norm = rule.c * std::pow(static_cast<double>(m), -0.25);
    WeightDelta w(d, m);
    const Vector shared = unit_direction(d, rng);
    for (int r = 0; r < h; ++r) w.col(r) = norm * shared;
    for (int r = h; r < m; ++r) w.col(r) = norm * unit_direction(d, rng);
    const WeightDelta ws = apply_signs(w, sample_signs(m, rng));
    std::vector<double> acc(stats.size(), 0.0);
    for (int p = 0; p < kProbesPerTrial; ++p) {
      const Vector x = sphere_point(d, bx, rng);
      const double fl = f_lin(net, ws, x);
      acc[0] += std::abs(fl);
      acc[1] += fl * fl;
      acc[2] += std::abs(quad_remainder(net, ws, x));
      acc[3] += std::abs(f_quad(net, w, x));
      acc[4] += fl;
      // Signs aligned with a_r w_r^T x make the cubic terms add up coherently.
      Vector sx(m);
      const Vector proj = w.transpose() * x;
      for (int r = 0; r < m; ++r) sx(r) = net.a(r) * proj(r) >= 0.0 ? 1.0 : -1.0;
      acc[5] += std::abs(quad_remainder(net, apply_signs(w, SignDiagonal{sx}), x));
    }
    for (double& a : acc) a /= kProbesPerTrial;
    values[wi][t] = acc;
  });
  return assemble(widths, stats, values);
}

ScanReport korder_scan(int k, int d, const std::vector<int>& widths, int trials, std::uint64_t seed, int threads) {
  check_widths(widths);
  if (trials < 2) throw std::invalid_argument("korder_scan: trials must be >= 2");
  const MomentPair pair = moment_pair(k);
  std::vector<std::string> stats;
  for (int j = 1; j <= k + 1; ++j) stats.push_back("abs_f" + std::to_string(j));
  std::vector<std::vector<std::vector<double>>> values(widths.size(),
                                                       std::vector<std::vector<double>>(trials));
  const int jobs = static_cast<int>(widths.size()) * trials;
  parallel_for(jobs, threads, [&](int job) {
    const int wi = job / trials;
    const int t = job % trials;
    const int m = widths[wi];
    const int h = m / 2;
    Rng rng(child_seed(seed, static_cast<std::uint64_t>(wi) * 1000003ULL + t));
    const Network net = init_symmetric(d, m, 1.0, rng(), Activation::relu_power(k));
    const double norm = std::pow(static_cast<double>(h), -1.0 / (2.0 * k));
    const Vector base = norm * unit_direction(d, rng);
    const PairScales z = sample_pair_scales(pair, h, rng);
    PairedDelta paired{base * z.zplus.transpose(), base * z.zminus.transpose()};
    std::vector<double> acc(stats.size(), 0.0);
    for (int p = 0; p < kProbesPerTrial; ++p) {
      const Vector x = sphere_point(d, 1.0, rng);
      for (int j = 1; j <= k + 1; ++j) acc[j - 1] += std::abs(f_korder(net, paired, x, j));
    }
    for (double& a : acc) a /= kProbesPerTrial;
    values[wi][t] = acc;
  });
  return assemble(widths, stats, values);
}

std::string scan_csv(const ScanReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "m,statistic,mean,std,trials\n";
  for (const auto& row : r.rows) os << row.m << ',' << row.statistic << ',' << row.mean << ',' << row.std << ',' << row.trials << '\n';
  return os.str();
}

nlohmann::json scan_slopes_json(const ScanReport& r) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& s : r.statistics) {
    auto it = r.slopes.find(s);
    if (it == r.slopes.end()) {
      j[s] = nullptr;
      continue;
    }
    j[s] = {{"slope", it->second.slope}, {"lo95", it->second.lo}, {"hi95", it->second.hi},
            {"intercept", it->second.intercept}, {"points", it->second.points}};
  }
  return j;
}

}  // namespace taylornet
