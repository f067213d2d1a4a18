// SPDX-License-Identifier: MIT
// Fourier-spectral operations on torus fields.
//
// Convention: the derivative multiplier zeroes the Nyquist wavenumber of its
// own axis, and `project` removes every mode carrying a Nyquist index. On the
// space of projected fields D is skew, so discrete integration by parts is exact.
#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "tbhom/torus.hpp"

namespace tbhom {

using cplx = std::complex<double>;

struct Mode {
  Vec k{0, 0};                 // wavevector (2 pi / period) * freq
  std::array<int, 2> freq{0, 0};
  std::array<bool, 2> nyquist{false, false};
  double weight = 1;           // multiplicity in the Hermitian half spectrum
  bool any_nyquist() const { return nyquist[0] || nyquist[1]; }
};

// Real-to-half-complex transforms for one grid. Instances are cached per thread
// (see `of`), so concurrent use from different threads never shares buffers.
class Spectral {
 public:
  explicit Spectral(const TorusGrid& g);
  ~Spectral();
  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

  static Spectral& of(const TorusGrid& g);

  const TorusGrid& grid() const { return grid_; }
  std::size_t half_size() const { return nhalf_; }
  const std::vector<Mode>& modes() const { return modes_; }

  // Unnormalized DFT of one real component.
  void forward(std::span<const double> in, cplx* out);
  // Inverse DFT including the 1/N^d factor.
  void inverse(const cplx* in, std::span<double> out);

 private:
  TorusGrid grid_;
  std::size_t nreal_ = 0, nhalf_ = 0;
  double* rbuf_ = nullptr;
  void* cbuf_ = nullptr;
  void* fwd_ = nullptr;
  void* inv_ = nullptr;
  std::vector<Mode> modes_;
};

enum class TransformDirection { forward, inverse };

// Full complex spectrum in FFT order, scaled so that a constant 1 maps to period^d.
struct Spectrum {
  TorusGrid grid;
  int components = 1;
  std::vector<cplx> values;
};

Spectrum spectral_forward(const Field& f);
// Real part of the inverse transform; `imag_residue` receives max |Im| if given.
Field spectral_inverse(const Spectrum& s, double* imag_residue = nullptr);
std::vector<cplx> spectral_inverse_complex(const Spectrum& s);

Field apply_multiplier(const Field& f, const std::function<cplx(const Mode&)>& m);

Field derivative(const Field& f, int axis);
Field derivative(const Field& f, std::span<const int> axes);
// Multi-index derivative d1^p1 d2^p2.
Field derivative_multi(const Field& f, int p1, int p2);
Field gradient(const Field& scalar);
Field divergence(const Field& vec);
Field laplacian(const Field& f);
Field project(const Field& f);
// Projected nodewise product of two scalar fields.
Field product(const Field& u, const Field& v);

struct PoissonOptions {
  bool strict = false;       // reject right-hand sides with a non-negligible mean
  double mean_tol = 1e-12;
};

// Solves -Lap u = rhs componentwise with zero-mean gauge.
Field solve_poisson(const Field& rhs, const PoissonOptions& opt = {}, std::vector<double>* discarded_mean = nullptr);

double cell_average(const Field& f, int component = 0);
std::vector<double> cell_average_all(const Field& f);

// Band-limited interpolation onto a grid refined by `factor` (zero padding).
Field upsample(const Field& f, int factor);
// Band-limited resampling to `n_new` points per axis (truncates when coarsening).
Field resample(const Field& f, int n_new);

double inner(const Field& u, const Field& v);  // h^d sum u v over all components

}  // namespace tbhom
