#ifndef STICKYSS_COLLISION_HPP
#define STICKYSS_COLLISION_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "core.hpp"
#include "parallel.hpp"

namespace stickyss {

// Where the gain of an off-center pair (odd i+j) goes.
enum class MidpointRule {
  linear,  // half to each neighbouring center
  cubic    // 4-point interpolation weights; also conserves energy
};

struct CollisionRate {
  Grid grid;
  std::vector<double> rate;
  double dissipation = 0.0;

  Profile profile() const { return Profile::perturbation(grid, rate); }
};

// |d dx|^gamma for offsets d = 0..N-1, with 0^0 = 1
struct KernelTable {
  double gamma = 0.0;
  std::vector<double> rate;
  std::vector<double> reversed;
  std::vector<double> rate_r2;

  KernelTable() = default;
  KernelTable(const Grid& grid, double gamma_) : gamma(gamma_) {
    if (!(gamma >= 0) || !(gamma < 1)) throw std::invalid_argument("kernel exponent must be in [0,1)");
    int n = grid.size();
    rate.resize(n);
    rate_r2.resize(n);
    for (int d = 0; d < n; ++d) {
      double r = d * grid.dx();
      rate[d] = d == 0 ? (gamma == 0.0 ? 1.0 : 0.0) : (gamma == 0.0 ? 1.0 : std::pow(r, gamma));
      rate_r2[d] = rate[d] * r * r;
    }
    reversed.assign(rate.rbegin(), rate.rend());
  }
};

namespace detail {

inline std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

// Linear convolution of two length-n sequences by zero-padded real FFTs.
class Convolver {
 public:
  explicit Convolver(int n) : n_(n) {
    m_ = 1;
    while (m_ < 2 * n) m_ <<= 1;
    a_ = fftw_alloc_real(m_);
    b_ = fftw_alloc_real(m_);
    A_ = fftw_alloc_complex(m_ / 2 + 1);
    B_ = fftw_alloc_complex(m_ / 2 + 1);
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fa_ = fftw_plan_dft_r2c_1d(m_, a_, A_, FFTW_ESTIMATE);
    fb_ = fftw_plan_dft_r2c_1d(m_, b_, B_, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_1d(m_, A_, a_, FFTW_ESTIMATE);
  }
  Convolver(const Convolver&) = delete;
  Convolver& operator=(const Convolver&) = delete;
  ~Convolver() {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(fa_);
    fftw_destroy_plan(fb_);
    fftw_destroy_plan(inv_);
    fftw_free(a_);
    fftw_free(b_);
    fftw_free(A_);
    fftw_free(B_);
  }

  // out[s] = sum_{i+j=s} f_i g_j, s = 0..2n-2
  void convolve(const double* f, const double* g, double* out) {
    std::fill(a_, a_ + m_, 0.0);
    std::copy(f, f + n_, a_);
    fftw_execute(fa_);
    if (f == g) {
      for (int k = 0; k <= m_ / 2; ++k) {
        std::complex<double> z(A_[k][0], A_[k][1]);
        z *= z;
        A_[k][0] = z.real();
        A_[k][1] = z.imag();
      }
    } else {
      std::fill(b_, b_ + m_, 0.0);
      std::copy(g, g + n_, b_);
      fftw_execute(fb_);
      for (int k = 0; k <= m_ / 2; ++k) {
        std::complex<double> z = std::complex<double>(A_[k][0], A_[k][1]) *
                                 std::complex<double>(B_[k][0], B_[k][1]);
        A_[k][0] = z.real();
        A_[k][1] = z.imag();
      }
    }
    fftw_execute(inv_);
    for (int s = 0; s < 2 * n_ - 1; ++s) out[s] = a_[s] / m_;
  }

 private:
  int n_, m_;
  double *a_, *b_;
  fftw_complex *A_, *B_;
  fftw_plan fa_, fb_, inv_;
};

} // namespace detail

// Spreads pair-sum masses H[s] (s = i + j) onto cell centers.
inline void deposit_pairs(const std::vector<double>& H, int n, MidpointRule rule,
                          std::vector<double>& gain) {
  gain.assign(n, 0.0);
  for (int k = 0; k < n; ++k) gain[k] += H[2 * k];
  for (int k = 0; k + 1 < n; ++k) {
    double h = H[2 * k + 1];
    if (rule == MidpointRule::cubic && k >= 1 && k + 2 < n) {
      gain[k - 1] -= h / 16.0;
      gain[k] += 9.0 * h / 16.0;
      gain[k + 1] += 9.0 * h / 16.0;
      gain[k + 2] -= h / 16.0;
    } else {
      gain[k] += 0.5 * h;
      gain[k + 1] += 0.5 * h;
    }
  }
}

// Evaluates Q_gamma on one grid, keeping kernel tables and FFT plans.
class CollisionEngine {
 public:
  CollisionEngine(const Grid& grid, double gamma)
      : grid_(grid), table_(grid, gamma), n_(grid.size()) {
    if (gamma == 0.0) conv_ = std::make_unique<detail::Convolver>(n_);
  }

  const Grid& grid() const { return grid_; }
  double gamma() const { return table_.gamma; }
  const KernelTable& table() const { return table_; }

  // H[s] = dx^2 sum_{i+j=s} f_i g_j K(|i-j|)
  void pair_sums(const std::vector<double>& f, const std::vector<double>& g,
                 std::vector<double>& H) {
    const int n = n_;
    H.assign(2 * n - 1, 0.0);
    const double dx2 = grid_.dx() * grid_.dx();
    if (conv_) {
      conv_->convolve(f.data(), g.data(), H.data());
      for (double& h : H) h *= dx2;
      return;
    }
    const bool self = &f == &g;
    const double* K = table_.rate.data();
    const double* Kr = table_.reversed.data();
    int workers = thread_budget();
    if (workers == 1) {
      accumulate_pairs(f, g, self, K, Kr, 0, n, H.data());
    } else {
      std::vector<std::vector<double>> parts(workers, std::vector<double>(2 * n - 1, 0.0));
      parallel_blocks(n, workers, [&](std::size_t b, std::size_t e, int w) {
        accumulate_pairs(f, g, self, K, Kr, static_cast<int>(b), static_cast<int>(e), parts[w].data());
      });
      for (auto& p : parts)
        for (int s = 0; s < 2 * n - 1; ++s) H[s] += p[s];
    }
    for (double& h : H) h *= dx2;
  }

  // (K * g)_i and (K r^2 * g)_i
  void kernel_sums(const std::vector<double>& g, std::vector<double>& ks, std::vector<double>* ks2) {
    const int n = n_;
    ks.assign(n, 0.0);
    if (ks2) ks2->assign(n, 0.0);
    if (table_.gamma == 0.0 && !ks2) {
      double total = 0.0;
      for (double v : g) total += v;
      std::fill(ks.begin(), ks.end(), total);
      return;
    }
    const double* K = table_.rate.data();
    const double* Kr = table_.reversed.data();
    std::vector<double> r2rev;
    const double* K2 = table_.rate_r2.data();
    if (ks2) r2rev.assign(table_.rate_r2.rbegin(), table_.rate_r2.rend());
    auto body = [&](std::size_t b, std::size_t e, int) {
      for (int i = static_cast<int>(b); i < static_cast<int>(e); ++i) {
        const double* gb = g.data();
        double s1 = 0.0, s2 = 0.0;
        const double* kr = Kr + (n - 1 - i);
        for (int j = 0; j < i; ++j) s1 += gb[j] * kr[j];
        for (int p = 0; p < n - i; ++p) s1 += gb[i + p] * K[p];
        ks[i] = s1;
        if (ks2) {
          const double* k2r = r2rev.data() + (n - 1 - i);
          for (int j = 0; j < i; ++j) s2 += gb[j] * k2r[j];
          for (int p = 0; p < n - i; ++p) s2 += gb[i + p] * K2[p];
          (*ks2)[i] = s2;
        }
      }
    };
    parallel_blocks(n, thread_budget(), body);
  }

  struct Detail {
    std::vector<double> rate;
    double dissipation = 0.0;
    double max_frequency = 0.0;
  };

  // q = (gain - loss)/dx with pairwise deposition
  void apply(const std::vector<double>& f, const std::vector<double>& g, MidpointRule rule,
             Detail& out) {
    const int n = n_;
    const double dx = grid_.dx();
    const bool self = &f == &g;
    pair_sums(f, g, H_);
    deposit_pairs(H_, n, rule, gain_);
    const bool gamma0 = table_.gamma == 0.0;
    kernel_sums(g, ksg_, gamma0 ? nullptr : &ks2g_);
    if (!self) kernel_sums(f, ksf_, gamma0 ? nullptr : &ks2f_);
    const std::vector<double>& ksf = self ? ksg_ : ksf_;
    out.rate.resize(n);
    double fmax = 0.0;
    for (int i = 0; i < n; ++i) {
      double loss = 0.5 * dx * dx * (f[i] * ksg_[i] + g[i] * ksf[i]);
      out.rate[i] = (gain_[i] - loss) / dx;
      fmax = std::max(fmax, ksg_[i] * dx);
    }
    out.max_frequency = fmax;
    if (gamma0) {
      double m0f = 0, m1f = 0, m2f = 0, m0g = 0, m1g = 0, m2g = 0;
      for (int i = 0; i < n; ++i) {
        double x = grid_.x(i);
        m0f += f[i];
        m1f += f[i] * x;
        m2f += f[i] * x * x;
        m0g += g[i];
        m1g += g[i] * x;
        m2g += g[i] * x * x;
      }
      out.dissipation = 0.25 * dx * dx * (m0f * m2g + m2f * m0g - 2.0 * m1f * m1g);
    } else {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += f[i] * ks2g_[i];
      out.dissipation = 0.25 * dx * dx * acc;
    }
  }

  std::vector<double> gain(const std::vector<double>& f, const std::vector<double>& g,
                           MidpointRule rule) {
    pair_sums(f, g, H_);
    deposit_pairs(H_, n_, rule, gain_);
    std::vector<double> out(n_);
    for (int i = 0; i < n_; ++i) out[i] = gain_[i] / grid_.dx();
    return out;
  }

 private:
  static void accumulate_pairs(const std::vector<double>& f, const std::vector<double>& g, bool self,
                               const double* K, const double* Kr, int begin, int end, double* H) {
    const int n = static_cast<int>(f.size());
    const double* gb = g.data();
    for (int i = begin; i < end; ++i) {
      const double fi = f[i];
      if (fi == 0.0) continue;
      if (self) {
        H[2 * i] += fi * fi * K[0];
        const double two_fi = 2.0 * fi;
        double* h = H + 2 * i;
        const double* gi = gb + i;
        for (int p = 1; p < n - i; ++p) h[p] += two_fi * gi[p] * K[p];
      } else {
        double* h = H + i;
        const double* kr = Kr + (n - 1 - i);
        for (int j = 0; j < i; ++j) h[j] += fi * gb[j] * kr[j];
        double* hf = H + 2 * i;
        const double* gi = gb + i;
        for (int p = 0; p < n - i; ++p) hf[p] += fi * gi[p] * K[p];
      }
    }
  }

  Grid grid_;
  KernelTable table_;
  int n_;
  std::unique_ptr<detail::Convolver> conv_;
  std::vector<double> H_, gain_, ksg_, ksf_, ks2g_, ks2f_;
};

// Direct double sum of the weak form; phi is evaluated at exact midpoints.
template <class Phi>
double q_weak(const Profile& f, const Profile& g, Phi&& phi, double gamma) {
  require_same_grid(f.grid(), g.grid());
  const Grid& gr = f.grid();
  const int n = gr.size();
  KernelTable K(gr, gamma);
  std::vector<double> ph(n);
  for (int i = 0; i < n; ++i) ph[i] = phi(gr.x(i));
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    if (f[i] == 0.0) continue;
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      double mid = 0.5 * (gr.x(i) + gr.x(j));
      double d = 2.0 * phi(mid) - ph[i] - ph[j];
      row += g[j] * d * K.rate[std::abs(i - j)];
    }
    total += f[i] * row;
  }
  return 0.5 * gr.dx() * gr.dx() * total;
}

// -1/4 dx^2 sum_ij f_i g_j |x_i - x_j|^(gamma+2), the closed form of q_weak at phi = x^2
inline double dissipation_pair_sum(const Profile& f, const Profile& g, double gamma) {
  require_same_grid(f.grid(), g.grid());
  KernelTable K(f.grid(), gamma);
  return -0.25 * f.grid().dx() * f.grid().dx() * toeplitz_form(f.values(), g.values(), K.rate_r2);
}

inline CollisionRate q_apply(const Profile& f, const Profile& g, double gamma,
                             MidpointRule rule = MidpointRule::linear) {
  require_same_grid(f.grid(), g.grid());
  CollisionEngine engine(f.grid(), gamma);
  CollisionEngine::Detail d;
  if (&f == &g)
    engine.apply(f.values(), f.values(), rule, d);
  else
    engine.apply(f.values(), g.values(), rule, d);
  return CollisionRate{f.grid(), std::move(d.rate), d.dissipation};
}

// Gain part of q_apply evaluated by plain O(N^2) pair enumeration.
inline std::vector<double> q_gain_direct(const Profile& f, const Profile& g, double gamma,
                                         MidpointRule rule = MidpointRule::linear) {
  require_same_grid(f.grid(), g.grid());
  const Grid& gr = f.grid();
  const int n = gr.size();
  KernelTable K(gr, gamma);
  std::vector<double> H(2 * n - 1, 0.0), gain;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) H[i + j] += gr.dx() * gr.dx() * f[i] * g[j] * K.rate[std::abs(i - j)];
  deposit_pairs(H, n, rule, gain);
  for (double& v : gain) v /= gr.dx();
  return gain;
}

// Q_0^+(f,f) through an FFT autoconvolution on the sum grid.
inline Profile q_gain_fast_maxwell(const Profile& f, MidpointRule rule = MidpointRule::linear) {
  const int n = f.size();
  detail::Convolver conv(n);
  std::vector<double> H(2 * n - 1), gain;
  conv.convolve(f.values().data(), f.values().data(), H.data());
  const double dx = f.grid().dx();
  for (double& h : H) h *= dx * dx;
  deposit_pairs(H, n, rule, gain);
  for (double& v : gain) v /= dx;
  return Profile::perturbation(f.grid(), std::move(gain), 0.0, f.c());
}

struct CollisionFrequency {
  Profile sigma;
  double kappa_hat = 0.0;
};

inline CollisionFrequency collision_frequency(const Profile& f, double gamma) {
  CollisionEngine engine(f.grid(), gamma);
  std::vector<double> ks;
  engine.kernel_sums(f.values(), ks, nullptr);
  const Grid& gr = f.grid();
  Weight w{gamma};
  double kappa = std::numeric_limits<double>::infinity();
  for (int i = 0; i < gr.size(); ++i) {
    ks[i] *= gr.dx();
    kappa = std::min(kappa, ks[i] / w(gr.x(i)));
  }
  return {Profile(gr, std::move(ks), gamma, f.c()), kappa};
}

inline double collision_frequency_at(const Profile& f, double gamma, double x) {
  const Grid& gr = f.grid();
  double acc = 0.0;
  for (int j = 0; j < gr.size(); ++j) {
    double r = std::abs(x - gr.x(j));
    acc += f[j] * (gamma == 0.0 ? 1.0 : std::pow(r, gamma));
  }
  return acc * gr.dx();
}

} // namespace stickyss

#endif
