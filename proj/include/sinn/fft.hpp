#pragma once
// Mixed-radix complex FFT for arbitrary lengths.
//
// Each length is factored into primes; every stage runs a generic radix-p
// butterfly against a table of exactly computed twiddles, so lengths such as
// 100 = 2*2*5*5 stay O(N log N) and accurate to a few ulps.

#include <complex>
#include <span>
#include <vector>

namespace sinn::fft {

using Complex = std::complex<double>;

class Plan {
 public:
  explicit Plan(int n);

  int size() const { return n_; }

  // Unnormalized in both directions:
  //   forward: X[k] = sum_j x[j] exp(-2 pi i j k / n)
  //   inverse: x[j] = sum_k X[k] exp(+2 pi i j k / n)
  void forward(std::span<Complex> data) const;
  void inverse(std::span<Complex> data) const;

 private:
  void execute(std::span<Complex> data, bool inverse) const;
  void work(Complex* out, const Complex* in, int fstride, int in_stride, std::size_t stage,
            int span, bool inverse) const;

  int n_;
  std::vector<int> factors_;
  std::vector<Complex> twiddles_;  // exp(-2 pi i j / n)
};

// Thread-local cache so hot loops do not rebuild twiddle tables.
const Plan& plan_for(int n);

// In-place transform of a row-major array of shape n^dims (last axis
// fastest), unnormalized.
void transform_nd(std::span<Complex> data, int dims, int n, bool inverse);

}  // namespace sinn::fft
