#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <fftw3.h>

namespace choq {

// Thin RAII wrappers over FFTW with FFTW_ESTIMATE|FFTW_UNALIGNED plans so the
// new-array execute interface can run on caller-owned buffers. Plans are
// deterministic and may be shared across calls; executions on distinct arrays
// are safe to run concurrently.

class Fft3 {
 public:
  explicit Fft3(int Q);
  ~Fft3();
  Fft3(const Fft3&) = delete;
  Fft3& operator=(const Fft3&) = delete;

  int Q() const { return Q_; }
  std::size_t real_size() const { return static_cast<std::size_t>(Q_) * Q_ * Q_; }
  std::size_t cplx_size() const {
    return static_cast<std::size_t>(Q_) * Q_ * (Q_ / 2 + 1);
  }
  void forward(double* in, std::complex<double>* out) const;
  // Unnormalized inverse; caller divides by Q^3.
  void backward(std::complex<double>* in, double* out) const;

 private:
  int Q_;
  fftw_plan fwd_, bwd_;
};

// 3D DST-I (RODFT00). Self-inverse up to the factor (2(P+1))^3. Diagonalizes
// the 7-point Laplacian with zero ghost values one cell outside the grid.
class Dst3 {
 public:
  explicit Dst3(int P);
  ~Dst3();
  Dst3(const Dst3&) = delete;
  Dst3& operator=(const Dst3&) = delete;

  int P() const { return P_; }
  void execute(double* in, double* out) const;

 private:
  int P_;
  fftw_plan plan_;
};

// 1D DST-I of length M (radial sine transforms).
class Dst1 {
 public:
  explicit Dst1(int M);
  ~Dst1();
  Dst1(const Dst1&) = delete;
  Dst1& operator=(const Dst1&) = delete;

  int M() const { return M_; }
  void execute(double* in, double* out) const;

 private:
  int M_;
  fftw_plan plan_;
};

}  // namespace choq
