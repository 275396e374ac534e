#include "choq/fft.hpp"

namespace choq {

namespace {
constexpr unsigned kFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;
}

Fft3 ::Fft3(int Q) : Q_(Q) {
  std::vector<double> r(real_size());
  std::vector<std::complex<double>> c(cplx_size());
  fwd_ = fftw_plan_dft_r2c_3d(Q, Q, Q, r.data(),
                              reinterpret_cast<fftw_complex*>(c.data()), kFlags);
  bwd_ = fftw_plan_dft_c2r_3d(Q, Q, Q, reinterpret_cast<fftw_complex*>(c.data()),
                              r.data(), kFlags);
}

Fft3 ::~Fft3() {
  fftw_destroy_plan(fwd_);
  fftw_destroy_plan(bwd_);
}

void Fft3::forward(double* in, std::complex<double>* out) const {
  fftw_execute_dft_r2c(fwd_, in, reinterpret_cast<fftw_complex*>(out));
}

void Fft3::backward(std::complex<double>* in, double* out) const {
  fftw_execute_dft_c2r(bwd_, reinterpret_cast<fftw_complex*>(in), out);
}

Dst3::Dst3(int P) : P_(P) {
  std::vector<double> a(static_cast<std::size_t>(P) * P * P), b(a.size());
  plan_ = fftw_plan_r2r_3d(P, P, P, a.data(), b.data(), FFTW_RODFT00, FFTW_RODFT00,
                           FFTW_RODFT00, kFlags);
}

Dst3::~Dst3() { fftw_destroy_plan(plan_); }

void Dst3::execute(double* in, double* out) const { fftw_execute_r2r(plan_, in, out); }

Dst1::Dst1(int M) : M_(M) {
  std::vector<double> a(M), b(M);
  plan_ = fftw_plan_r2r_1d(M, a.data(), b.data(), FFTW_RODFT00, kFlags);
}

Dst1::~Dst1() { fftw_destroy_plan(plan_); }

void Dst1::execute(double* in, double* out) const { fftw_execute_r2r(plan_, in, out); }

}  // namespace choq
