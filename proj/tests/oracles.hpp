#pragma once
// Reference computations used only by tests. Nothing here calls into the
// code paths it checks.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

namespace oracle {

struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1, 1] with Newton-refined roots.
inline Quadrature gauss_legendre(int n) {
  Quadrature q;
  q.nodes.resize(n);
  q.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    q.nodes[i] = x;
    q.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return q;
}

/// Integral of f over [a, b], split into `panels` Gauss-Legendre panels.
template <typename F>
double integrate(F&& f, double a, double b, int panels = 16, int order = 32) {
  static const Quadrature q = gauss_legendre(32);
  const Quadrature& rule = order == 32 ? q : gauss_legendre(order);
  double total = 0.0;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double mid = lo + h / 2;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      total += rule.weights[i] * f(mid + h / 2 * rule.nodes[i]) * h / 2;
    }
  }
  return total;
}

template <typename F>
double integrate2(F&& f, double ax, double bx, double ay, double by, int panels = 8) {
  return integrate([&](double x) { return integrate([&](double y) { return f(x, y); }, ay, by, panels); },
                   ax, bx, panels);
}

inline double gauss2(double x, double y, double mu, double sigma) {
  const double zx = (x - mu) / sigma;
  const double zy = (y - mu) / sigma;
  return std::exp(-0.5 * (zx * zx + zy * zy)) / (2.0 * std::numbers::pi * sigma * sigma);
}

/// Mass of the untruncated 2-D Gaussian on the unit box, by quadrature.
inline double box_mass(double mu, double sigma) {
  return integrate2([&](double x, double y) { return gauss2(x, y, mu, sigma); }, -0.5, 0.5, -0.5, 0.5);
}

/// Mean of N(mu, sigma) truncated to [-0.5, 0.5], by 1-D quadrature.
inline double truncated_mean_quadrature(double mu, double sigma) {
  auto g = [&](double x) { return std::exp(-0.5 * ((x - mu) / sigma) * ((x - mu) / sigma)); };
  const double num = integrate([&](double x) { return x * g(x); }, -0.5, 0.5, 64);
  const double den = integrate(g, -0.5, 0.5, 64);
  return num / den;
}

/// Closed-form truncated-normal mean mu + sigma (phi(a) - phi(b)) / (Phi(b) - Phi(a)).
inline double truncated_mean_closed(double mu, double sigma) {
  const auto phi = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); };
  const auto Phi = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
  const double a = (-0.5 - mu) / sigma;
  const double b = (0.5 - mu) / sigma;
  return mu + sigma * (phi(a) - phi(b)) / (Phi(b) - Phi(a));
}

inline double chi2_critical(double df, double significance) {
  boost::math::chi_squared dist(df);
  return boost::math::quantile(boost::math::complement(dist, significance));
}

// ---------------------------------------------------------------- AP oracle

struct Box {
  double xc, yc, w, h;
};
struct Pred {
  double x, y, score;
};
struct Image {
  std::vector<Box> gts;
  std::vector<Pred> preds;
};

/// Number of true positives among predictions scoring >= cutoff in one image,
/// matching greedily by score and nearest free box.
inline int count_tp(const Image& img, double cutoff, double tau, int& fp) {
  std::vector<Pred> kept;
  for (const auto& p : img.preds) {
    if (p.score >= cutoff) kept.push_back(p);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const Pred& a, const Pred& b) { return a.score > b.score; });
  std::vector<bool> used(img.gts.size(), false);
  int tp = 0;
  for (const auto& p : kept) {
    int best = -1;
    double best_d = 0.0;
    for (std::size_t g = 0; g < img.gts.size(); ++g) {
      if (used[g]) continue;
      const Box& b = img.gts[g];
      const double d = std::max(std::abs(p.x - b.xc) / (b.w / 2), std::abs(p.y - b.yc) / (b.h / 2));
      if (d <= tau && (best < 0 || d < best_d)) {
        best = static_cast<int>(g);
        best_d = d;
      }
    }
    if (best >= 0) {
      used[best] = true;
      ++tp;
    } else {
      ++fp;
    }
  }
  return tp;
}

/// AP by sweeping every distinct score as a cutoff and re-matching from
/// scratch. Assumes distinct scores.
inline double brute_force_ap(const std::vector<Image>& images, double tau) {
  std::size_t gt_total = 0;
  std::vector<double> cutoffs;
  for (const auto& img : images) {
    gt_total += img.gts.size();
    for (const auto& p : img.preds) cutoffs.push_back(p.score);
  }
  std::sort(cutoffs.begin(), cutoffs.end(), std::greater<>());
  std::vector<double> recall, precision;
  for (double c : cutoffs) {
    int tp = 0, fp = 0;
    for (const auto& img : images) tp += count_tp(img, c, tau, fp);
    recall.push_back(static_cast<double>(tp) / static_cast<double>(gt_total));
    precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
  }
  double ap = 0.0, prev = 0.0;
  for (std::size_t i = 0; i < recall.size(); ++i) {
    if (recall[i] > prev) {
      double best = 0.0;
      for (std::size_t j = i; j < precision.size(); ++j) best = std::max(best, precision[j]);
      ap += (recall[i] - prev) * best;
      prev = recall[i];
    }
  }
  return ap;
}

}  // namespace oracle
