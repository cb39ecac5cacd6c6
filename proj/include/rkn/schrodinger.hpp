#pragma once

// Split-step Fourier propagation of i psi_t = -psi_xx / 2 + V(x) psi on a
// periodic uniform grid. The kinetic part plays the drift role and the
// potential the kick role of a splitting schedule: [V,[T,V]] is a
// multiplication operator, so [V,[V,[T,V]]] = 0 as for RKN systems.

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <unordered_map>
#include <vector>

#include "rkn/errors.hpp"
#include "rkn/scheme.hpp"

namespace rkn::schrodinger {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

class SpatialGrid {
 public:
  SpatialGrid(double x_min, double x_max, int n) : x_min_(x_min), x_max_(x_max), n_(n) {
    if (n < 2 || (n & (n - 1)) != 0) throw InvalidArgument("grid size must be a power of two");
    if (!(x_max > x_min)) throw InvalidArgument("grid requires x_max > x_min");
  }

  int size() const { return n_; }
  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  double dx() const { return (x_max_ - x_min_) / n_; }
  double node(int i) const { return x_min_ + i * dx(); }

  std::vector<double> nodes() const {
    std::vector<double> x(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) x[static_cast<std::size_t>(i)] = node(i);
    return x;
  }

  // DFT ordering 0..N/2-1, -N/2..-1, scaled by 2 pi / L.
  std::vector<double> wavenumbers() const {
    std::vector<double> k(static_cast<std::size_t>(n_));
    const double scale = 2 * std::numbers::pi / (x_max_ - x_min_);
    for (int i = 0; i < n_; ++i)
      k[static_cast<std::size_t>(i)] = scale * (i < n_ / 2 ? i : i - n_);
    return k;
  }

 private:
  double x_min_, x_max_;
  int n_;
};

struct QuantumState {
  ComplexVector u;
  double t = 0;
};

// Unitary DFT pair on N points (both directions scaled by 1/sqrt(N)),
// evaluated in long double. The rounded twiddle factors of a double FFT have
// a slightly biased modulus, which over ~10^5 transforms shows up as a
// systematic norm drift of order 1e-11.
class FourierTransform {
 public:
  using Extended = std::complex<long double>;

  explicit FourierTransform(int n) : n_(n), buffer_(static_cast<std::size_t>(n)) {
    auto* data = reinterpret_cast<fftwl_complex*>(buffer_.data());
    std::lock_guard lock(planner_mutex());
    forward_ = fftwl_plan_dft_1d(n, data, data, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftwl_plan_dft_1d(n, data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~FourierTransform() {
    std::lock_guard lock(planner_mutex());
    fftwl_destroy_plan(forward_);
    fftwl_destroy_plan(backward_);
  }
  FourierTransform(const FourierTransform&) = delete;
  FourierTransform& operator=(const FourierTransform&) = delete;

  int size() const { return n_; }

  void forward(ComplexVector& u) { run(forward_, u); }
  void backward(ComplexVector& u) { run(backward_, u); }

  // u <- IDFT(m .* DFT(u)) without rounding the intermediate spectrum.
  void multiply_spectrum(ComplexVector& u, const std::vector<Extended>& m) {
    load(u);
    fftwl_execute(forward_);
    for (std::size_t i = 0; i < buffer_.size(); ++i) buffer_[i] *= m[i];
    fftwl_execute(backward_);
    store(u, 1.0L / n_);
  }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }

  void load(const ComplexVector& u) {
    if (u.size() != buffer_.size()) throw InvalidArgument("FFT size mismatch");
    for (std::size_t i = 0; i < u.size(); ++i) buffer_[i] = Extended(u[i].real(), u[i].imag());
  }
  void store(ComplexVector& u, long double scale) const {
    for (std::size_t i = 0; i < u.size(); ++i) {
      const Extended z = buffer_[i] * scale;
      u[i] = Complex(static_cast<double>(z.real()), static_cast<double>(z.imag()));
    }
  }

  void run(fftwl_plan plan, ComplexVector& u) {
    load(u);
    fftwl_execute(plan);
    store(u, 1.0L / std::sqrt(static_cast<long double>(n_)));
  }

  int n_;
  std::vector<Extended> buffer_;
  fftwl_plan forward_ = nullptr;
  fftwl_plan backward_ = nullptr;
};

inline std::vector<double> poschl_teller_potential(const SpatialGrid& grid, double depth_product) {
  if (!(depth_product > 0)) throw InvalidArgument("well-depth product must be positive");
  std::vector<double> V(static_cast<std::size_t>(grid.size()));
  for (int i = 0; i < grid.size(); ++i) {
    const double sech = 1 / std::cosh(grid.node(i));
    V[static_cast<std::size_t>(i)] = -0.5 * depth_product * sech * sech;
  }
  return V;
}

// Discrete norm sum |u_n|^2 dx.
inline double norm_squared(const SpatialGrid& grid, const ComplexVector& u) {
  double s = 0;
  for (const Complex& z : u) s += std::norm(z);
  return s * grid.dx();
}

// sigma exp(-x^2/2), sigma fixed by the discrete norm.
inline QuantumState initial_gaussian(const SpatialGrid& grid) {
  QuantumState s;
  s.u.resize(static_cast<std::size_t>(grid.size()));
  for (int i = 0; i < grid.size(); ++i) {
    const double x = grid.node(i);
    s.u[static_cast<std::size_t>(i)] = std::exp(-0.5 * x * x);
  }
  const double sigma = 1 / std::sqrt(norm_squared(grid, s.u));
  for (auto& z : s.u) z *= sigma;
  return s;
}

// Split-step propagator with memoised phase tables per distinct theta.
class Propagator {
 public:
  Propagator(SpatialGrid grid, std::vector<double> potential)
      : grid_(grid),
        potential_(std::move(potential)),
        k_(grid.wavenumbers()),
        fft_(std::make_unique<FourierTransform>(grid.size())) {
    if (potential_.size() != static_cast<std::size_t>(grid.size()))
      throw InvalidArgument("potential length must match grid");
    symbol_.resize(k_.size());
    for (std::size_t i = 0; i < k_.size(); ++i)
      symbol_[i] = FourierTransform::Extended(0.5L * k_[i] * k_[i], 0);
  }

  const SpatialGrid& grid() const { return grid_; }
  const std::vector<double>& potential() const { return potential_; }

  // u <- IDFT(exp(-i theta k^2 / 2) DFT(u)).
  void kinetic_flow(QuantumState& s, double theta) {
    if (theta == 0) return;
    fft_->multiply_spectrum(s.u, table(kinetic_cache_, theta, k_, true));
  }

  // u_n <- exp(-i theta V_n) u_n.
  void potential_flow(QuantumState& s, double theta) {
    if (theta == 0) return;
    const auto& phase = table(potential_cache_, theta, potential_, false);
    for (std::size_t i = 0; i < s.u.size(); ++i) {
      const FourierTransform::Extended z =
          FourierTransform::Extended(s.u[i].real(), s.u[i].imag()) * phase[i];
      s.u[i] = Complex(static_cast<double>(z.real()), static_cast<double>(z.imag()));
    }
  }

  // H u = IDFT(k^2/2 DFT(u)) + V u.
  ComplexVector apply_hamiltonian(const ComplexVector& u) {
    ComplexVector w = apply_kinetic(u);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += potential_[i] * u[i];
    return w;
  }

  ComplexVector apply_kinetic(const ComplexVector& u) {
    ComplexVector w = u;
    fft_->multiply_spectrum(w, symbol_);
    return w;
  }

  // Re <u, H u> with the dx quadrature weight.
  double energy(const ComplexVector& u) {
    const ComplexVector hu = apply_hamiltonian(u);
    Complex s = 0;
    for (std::size_t i = 0; i < u.size(); ++i) s += std::conj(u[i]) * hu[i];
    return s.real() * grid_.dx();
  }

  FourierTransform& transform() { return *fft_; }

 private:
  using Table = std::vector<FourierTransform::Extended>;
  using Cache = std::unordered_map<double, Table>;

  const Table& table(Cache& cache, double theta, const std::vector<double>& w, bool kinetic) {
    auto it = cache.find(theta);
    if (it != cache.end()) return it->second;
    Table phase(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
      const long double x = w[i];
      const long double angle = kinetic ? -theta * 0.5L * x * x : -theta * x;
      phase[i] = FourierTransform::Extended(std::cos(angle), std::sin(angle));
    }
    return cache.emplace(theta, std::move(phase)).first->second;
  }

  SpatialGrid grid_;
  std::vector<double> potential_;
  std::vector<double> k_;
  std::vector<FourierTransform::Extended> symbol_;
  std::unique_ptr<FourierTransform> fft_;
  Cache kinetic_cache_, potential_cache_;
};

enum class RoleMapping { KineticDrift, PotentialDrift };

struct EnergySample {
  double t = 0;
  double norm_err = 0;
  double energy_err = 0;
};

struct EvolveResult {
  std::vector<EnergySample> samples;
  QuantumState final_state;
  double max_energy_err = 0;
  double max_norm_err = 0;
  long steps = 0;
  long potential_flows = 0;
  long kinetic_flows = 0;
};

// Applies the schedule repeatedly (drift -> kinetic, kick -> potential),
// sampling norm and energy errors every `sample_every` steps and at the end.
inline EvolveResult evolve(const FlowSchedule& schedule, Propagator& prop,
                           QuantumState state, double h, double t_final,
                           long sample_every = 1,
                           RoleMapping roles = RoleMapping::KineticDrift) {
  if (roles != RoleMapping::KineticDrift)
    throw InvalidArgument(
        "kinetic part must take the drift role: the potential as drift breaks the RKN structure");
  if (h == 0) throw InvalidArgument("evolve: h must be non-zero");
  const double nd = (t_final - state.t) / h;
  if (nd < 0 || std::abs(nd - std::round(nd)) > 1e-8)
    throw InvalidArgument("evolve: (t_final - t0)/h must be a non-negative integer");
  const long n = std::lround(nd);
  if (sample_every < 1) sample_every = 1;

  EvolveResult r;
  const double norm0 = norm_squared(prop.grid(), state.u);
  const double energy0 = prop.energy(state.u);
  const double t0 = state.t;
  auto sample = [&](long i) {
    EnergySample s;
    s.t = t0 + static_cast<double>(i) * h;
    s.norm_err = std::abs(norm_squared(prop.grid(), state.u) - norm0);
    s.energy_err = std::abs(prop.energy(state.u) - energy0);
    r.max_energy_err = std::max(r.max_energy_err, s.energy_err);
    r.max_norm_err = std::max(r.max_norm_err, s.norm_err);
    r.samples.push_back(s);
  };
  sample(0);

  double pending = 0;  // trailing kinetic flow held over for merging
  const std::size_t m = schedule.entries.size();
  for (long i = 1; i <= n; ++i) {
    const bool observe = i % sample_every == 0 || i == n;
    for (std::size_t j = 0; j < m; ++j) {
      const FlowEntry& e = schedule.entries[j];
      const double theta = e.coefficient * h;
      if (e.kind == FlowKind::Drift) {
        double total = theta + (j == 0 ? pending : 0.0);
        if (j == 0) pending = 0;
        if (j + 1 == m && schedule.fsal_mergeable && !observe) {
          pending = total;
          continue;
        }
        prop.kinetic_flow(state, total);
        ++r.kinetic_flows;
      } else {
        if (j == 0 && pending != 0) {
          prop.kinetic_flow(state, pending);
          ++r.kinetic_flows;
          pending = 0;
        }
        prop.potential_flow(state, theta);
        ++r.potential_flows;
      }
    }
    if (observe) {
      state.t = t0 + static_cast<double>(i) * h;
      sample(i);
    }
  }
  state.t = t0 + static_cast<double>(n) * h;
  r.steps = n;
  r.final_state = std::move(state);
  return r;
}

}  // namespace rkn::schrodinger

namespace rkn::schrodinger {

// One-off flows; evolve() reuses a Propagator instead.
inline QuantumState kinetic_flow(const SpatialGrid& grid, QuantumState s, double theta) {
  Propagator p(grid, std::vector<double>(static_cast<std::size_t>(grid.size()), 0.0));
  p.kinetic_flow(s, theta);
  return s;
}

inline QuantumState potential_flow(const SpatialGrid& grid, QuantumState s, double theta,
                                   const std::vector<double>& V) {
  Propagator p(grid, V);
  p.potential_flow(s, theta);
  return s;
}

}  // namespace rkn::schrodinger
