#include "wcedetect/glcm.hpp"

#include <atomic>
#include <cmath>
#include <numeric>

namespace wcedetect {

void GlcmConfig::validate() const {
  if (levels < 2) throw ValidationError("GlcmConfig: levels must be >= 2");
  if (distance < 1) throw ValidationError("GlcmConfig: distance must be >= 1");
  if (angle != 0 && angle != 45 && angle != 90 && angle != 135) {
    throw ValidationError("GlcmConfig: angle must be one of 0, 45, 90, 135");
  }
}

std::pair<int, int> glcm_offset(int angle, int distance) {
  switch (angle) {
    case 0: return {distance, 0};
    case 45: return {distance, -distance};
    case 90: return {0, -distance};
    case 135: return {-distance, -distance};
    default: throw ValidationError("glcm_offset: unsupported angle " + std::to_string(angle));
  }
}

int quantize_level(double value, int levels) {
  const double t = std::floor(value * levels / 255.0);
  return static_cast<int>(std::clamp(t, 0.0, static_cast<double>(levels - 1)));
}

GlcmMatrix::GlcmMatrix(int levels, std::vector<double> probabilities)
    : levels_(levels), p_(std::move(probabilities)) {
  if (levels < 2 || p_.size() != static_cast<std::size_t>(levels) * levels) {
    throw ValidationError("GlcmMatrix: size does not match level count");
  }
}

GlcmMatrix compute_glcm(const Image& image, const GlcmConfig& config) {
  config.validate();
  const int L = config.levels;
  const auto [dx, dy] = glcm_offset(config.angle, config.distance);

  Raster<int> q(image.width(), image.height());
  for (std::size_t i = 0; i < image.size(); ++i) q.values()[i] = quantize_level(image.values()[i], L);

  std::vector<double> counts(static_cast<std::size_t>(L) * L, 0.0);
  const int x0 = std::max(0, -dx), x1 = std::min(image.width(), image.width() - dx);
  const int y0 = std::max(0, -dy), y1 = std::min(image.height(), image.height() - dy);
  std::size_t pairs = 0;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      counts[static_cast<std::size_t>(q(x, y)) * L + q(x + dx, y + dy)] += 1.0;
      ++pairs;
    }
  }
  if (pairs == 0) {
    throw ValidationError("compute_glcm: image too small for any pixel pair at angle " +
                          std::to_string(config.angle) + ", distance " +
                          std::to_string(config.distance));
  }

  double total = static_cast<double>(pairs);
  if (config.symmetric) {
    for (int i = 0; i < L; ++i) {
      for (int j = i + 1; j < L; ++j) {
        const double s = counts[i * L + j] + counts[j * L + i];
        counts[i * L + j] = s;
        counts[j * L + i] = s;
      }
      counts[i * L + i] *= 2.0;
    }
    total *= 2.0;
  }
  for (double& c : counts) c /= total;
  return GlcmMatrix(L, std::move(counts));
}

const std::array<std::string_view, kGlcmFeatureCount>& glcm_feature_names() {
  static const std::array<std::string_view, kGlcmFeatureCount> names = {
      "contrast",
      "correlation",
      "entropy",
      "energy",
      "difference_variance",
      "difference_entropy",
      "info_measure_correlation_1",
      "info_measure_correlation_2",
      "inverse_difference",
      "sum_average",
      "sum_variance",
      "sum_of_squares",
      "sum_entropy",
      "max_correlation_coefficient",
      "autocorrelation",
      "cluster_prominence",
      "cluster_shade",
      "dissimilarity",
      "homogeneity",
      "max_probability",
      "inverse_difference_normalized",
      "inverse_difference_moment_normalized",
  };
  return names;
}

namespace {

std::atomic<std::size_t> g_mcc_failures{0};

constexpr double kDegenerate = 1e-12;
constexpr double kMccTolerance = 1e-10;
constexpr int kMccMaxIterations = 500;
constexpr int kMccSquaringInterval = 8;
constexpr int kMccMaxSquarings = 40;

double xlogx(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

struct Marginals {
  std::vector<double> px, py;
  double mean_x = 0, mean_y = 0, var_x = 0, var_y = 0;
};

// Gray levels are 1-based in every formula below.
Marginals marginals(const GlcmMatrix& m) {
  const int L = m.levels();
  Marginals mg;
  mg.px.assign(L, 0.0);
  mg.py.assign(L, 0.0);
  for (int i = 0; i < L; ++i) {
    for (int j = 0; j < L; ++j) {
      mg.px[i] += m(i, j);
      mg.py[j] += m(i, j);
    }
  }
  for (int i = 0; i < L; ++i) {
    mg.mean_x += (i + 1) * mg.px[i];
    mg.mean_y += (i + 1) * mg.py[i];
  }
  for (int i = 0; i < L; ++i) {
    mg.var_x += (i + 1 - mg.mean_x) * (i + 1 - mg.mean_x) * mg.px[i];
    mg.var_y += (i + 1 - mg.mean_y) * (i + 1 - mg.mean_y) * mg.py[i];
  }
  return mg;
}

}  // namespace

MccResult max_correlation_coefficient(const GlcmMatrix& m) {
  const Marginals mg = marginals(m);
  if (mg.var_x <= kDegenerate || mg.var_y <= kDegenerate) return {0.0, true, 0};

  const int L = m.levels();
  std::vector<int> rows, cols;
  for (int i = 0; i < L; ++i) {
    if (mg.px[i] > 0.0) rows.push_back(i);
    if (mg.py[i] > 0.0) cols.push_back(i);
  }
  const std::size_t n = rows.size();

  // S = A A^T with A(i,k) = p(i,k) / sqrt(px_i py_k) is symmetric and similar to Q.
  std::vector<double> a(n * cols.size());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      a[r * cols.size() + c] =
          m(rows[r], cols[c]) / std::sqrt(mg.px[rows[r]] * mg.py[cols[c]]);
    }
  }
  std::vector<double> s(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t c = 0; c < cols.size(); ++c) acc += a[i * cols.size() + c] * a[j * cols.size() + c];
      s[i * n + j] = acc;
    }
  }

  // The leading eigenpair is (1, sqrt(px)); remove it.
  std::vector<double> top(n);
  for (std::size_t i = 0; i < n; ++i) top[i] = std::sqrt(mg.px[rows[i]]);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) s[i * n + j] -= top[i] * top[j];
  }

  auto project_out_top = [&](std::vector<double>& v) {
    const double d = std::inner_product(v.begin(), v.end(), top.begin(), 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i] -= d * top[i];
  };
  auto normalize = [](std::vector<double>& v) {
    const double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    if (norm > 0.0) {
      for (double& x : v) x /= norm;
    }
    return norm;
  };

  auto multiply = [n](const std::vector<double>& mat, const std::vector<double>& x, std::vector<double>& out) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += mat[i * n + j] * x[j];
      out[i] = acc;
    }
  };

  // Nearly tied second and third eigenvalues make plain iteration on S crawl, so the step
  // matrix is squared (and rescaled) after every few unconverged iterations.
  std::vector<double> step = s;
  auto square_step = [&] {
    std::vector<double> sq(n * n, 0.0);
    double peak = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j < n; ++j) sq[i * n + j] += step[i * n + k] * step[k * n + j];
    for (double x : sq) peak = std::max(peak, std::abs(x));
    if (peak > 0.0)
      for (double& x : sq) x /= peak;
    step.swap(sq);
  };

  // Fixed pseudo-random start keeps results reproducible.
  std::vector<double> v(n);
  std::uint64_t state = 0x9E3779B97F4A7C15ull;
  for (double& x : v) {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    x = static_cast<double>(state >> 11) * 0x1.0p-53 + 0.5;
  }
  project_out_top(v);
  if (normalize(v) == 0.0) return {0.0, true, 0};

  std::vector<double> w(n), sv(n);
  for (int it = 1; it <= kMccMaxIterations; ++it) {
    if (it % kMccSquaringInterval == 0 && it / kMccSquaringInterval <= kMccMaxSquarings) square_step();
    multiply(step, v, w);
    project_out_top(w);
    if (normalize(w) == 0.0) return {0.0, true, it};
    v.swap(w);
    // Convergence is judged on S itself.
    multiply(s, v, sv);
    project_out_top(sv);
    const double lambda = std::inner_product(v.begin(), v.end(), sv.begin(), 0.0);
    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) residual += (sv[i] - lambda * v[i]) * (sv[i] - lambda * v[i]);
    if (std::sqrt(residual) <= kMccTolerance) return {std::sqrt(std::max(lambda, 0.0)), true, it};
  }
  return {0.0, false, kMccMaxIterations};
}

std::size_t mcc_failure_count() { return g_mcc_failures.load(std::memory_order_relaxed); }

GlcmFeatures glcm_features(const GlcmMatrix& m) {
  const int L = m.levels();
  const Marginals mg = marginals(m);

  std::vector<double> p_sum(2 * L + 1, 0.0);  // index k = i + j, 1-based levels
  std::vector<double> p_diff(L, 0.0);         // index k = |i - j|
  double contrast = 0, entropy = 0, energy = 0, inv_diff = 0, autocorr = 0, prominence = 0,
         shade = 0, dissimilarity = 0, homogeneity = 0, max_p = 0, idn = 0, idmn = 0,
         sum_squares = 0, cross = 0, hxy1 = 0, hxy2 = 0;
  for (int i = 1; i <= L; ++i) {
    for (int j = 1; j <= L; ++j) {
      const double p = m(i - 1, j - 1);
      const double d = i - j;
      const double ad = std::abs(d);
      p_sum[i + j] += p;
      p_diff[static_cast<int>(ad)] += p;
      contrast += d * d * p;
      entropy -= xlogx(p);
      energy += p * p;
      inv_diff += p / (1.0 + ad);
      autocorr += i * j * p;
      const double c = i + j - mg.mean_x - mg.mean_y;
      prominence += c * c * c * c * p;
      shade += c * c * c * p;
      dissimilarity += ad * p;
      homogeneity += p / (1.0 + d * d);
      max_p = std::max(max_p, p);
      idn += p / (1.0 + ad / L);
      idmn += p / (1.0 + d * d / (static_cast<double>(L) * L));
      sum_squares += (i - mg.mean_x) * (i - mg.mean_x) * p;
      cross += i * j * p;
      const double pxy = mg.px[i - 1] * mg.py[j - 1];
      if (p > 0.0) hxy1 -= p * std::log(pxy);
      if (pxy > 0.0) hxy2 -= pxy * std::log(pxy);
    }
  }

  const double sd = std::sqrt(mg.var_x) * std::sqrt(mg.var_y);
  const double correlation = sd > kDegenerate ? (cross - mg.mean_x * mg.mean_y) / sd : 0.0;

  double sum_avg = 0, sum_entropy = 0;
  for (int k = 2; k <= 2 * L; ++k) {
    sum_avg += k * p_sum[k];
    sum_entropy -= xlogx(p_sum[k]);
  }
  double sum_var = 0;
  for (int k = 2; k <= 2 * L; ++k) sum_var += (k - sum_avg) * (k - sum_avg) * p_sum[k];

  double diff_mean = 0, diff_entropy = 0;
  for (int k = 0; k < L; ++k) {
    diff_mean += k * p_diff[k];
    diff_entropy -= xlogx(p_diff[k]);
  }
  double diff_var = 0;
  for (int k = 0; k < L; ++k) diff_var += (k - diff_mean) * (k - diff_mean) * p_diff[k];

  double hx = 0, hy = 0;
  for (int i = 0; i < L; ++i) {
    hx -= xlogx(mg.px[i]);
    hy -= xlogx(mg.py[i]);
  }
  const double hmax = std::max(hx, hy);
  const double imc1 = hmax > kDegenerate ? (entropy - hxy1) / hmax : 0.0;
  const double imc2 = std::sqrt(std::max(0.0, 1.0 - std::exp(-2.0 * std::max(0.0, hxy2 - entropy))));

  const MccResult mcc = max_correlation_coefficient(m);

  GlcmFeatures out;
  out.mcc_converged = mcc.converged;
  if (!mcc.converged) g_mcc_failures.fetch_add(1, std::memory_order_relaxed);
  out.values = {contrast,  correlation,   entropy,     energy,      diff_var,    diff_entropy,
                imc1,      imc2,          inv_diff,    sum_avg,     sum_var,     sum_squares,
                sum_entropy, mcc.value,   autocorr,    prominence,  shade,       dissimilarity,
                homogeneity, max_p,       idn,         idmn};
  return out;
}

}  // namespace wcedetect
