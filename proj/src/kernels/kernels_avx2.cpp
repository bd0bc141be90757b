// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <cmath>
#include <stdexcept>

#include "kernels/kernels_impl.hpp"

namespace srd::kernels::avx2 {
namespace {

// exp(x) for x <= 0. Cody-Waite reduction x = n ln2 + r, |r| <= ln2/2,
// degree-13 Taylor polynomial for exp(r), then scaling by 2^n through the
// exponent field. Results below ~1e-308 flush to zero.
inline __m256d exp_nonpositive(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);
  const __m256d shifter = _mm256_set1_pd(6755399441055744.0);  // 2^52 + 2^51
  const __m256d floor_x = _mm256_set1_pd(-708.0);

  const __m256d underflow = _mm256_cmp_pd(x, floor_x, _CMP_LT_OQ);
  x = _mm256_max_pd(x, floor_x);

  const __m256d nr = _mm256_fmadd_pd(x, log2e, shifter);
  const __m256d n = _mm256_sub_pd(nr, shifter);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);

  static constexpr double c[] = {
      1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0, 1.0 / 362880.0,
      1.0 / 40320.0,      1.0 / 5040.0,      1.0 / 720.0,      1.0 / 120.0,      1.0 / 24.0,
      1.0 / 6.0,          0.5,               1.0,              1.0};
  __m256d p = _mm256_set1_pd(c[0]);
  for (int i = 1; i < 14; ++i) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(c[i]));

  // 2^n from the integer sitting in the low mantissa bits of nr.
  const __m256i bits = _mm256_castpd_si256(nr);
  const __m256i biased = _mm256_add_epi64(bits, _mm256_set1_epi64x(1023 - 0x4338000000000000LL));
  const __m256d scale = _mm256_castsi256_pd(_mm256_slli_epi64(biased, 52));
  return _mm256_andnot_pd(underflow, _mm256_mul_pd(p, scale));
}

struct Neumaier4 {
  __m256d sum = _mm256_setzero_pd();
  __m256d comp = _mm256_setzero_pd();

  void add(__m256d x) {
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    const __m256d t = _mm256_add_pd(sum, x);
    const __m256d big_sum = _mm256_cmp_pd(_mm256_andnot_pd(sign_mask, sum), _mm256_andnot_pd(sign_mask, x),
                                          _CMP_GE_OQ);
    const __m256d c_sum = _mm256_add_pd(_mm256_sub_pd(sum, t), x);
    const __m256d c_x = _mm256_add_pd(_mm256_sub_pd(x, t), sum);
    comp = _mm256_add_pd(comp, _mm256_blendv_pd(c_x, c_sum, big_sum));
    sum = t;
  }

  // Lanes are folded in index order together with the scalar tail.
  template <class Tail>
  double finish(Tail&& tail) const {
    alignas(32) double s[4];
    alignas(32) double c[4];
    _mm256_store_pd(s, sum);
    _mm256_store_pd(c, comp);
    double total = 0.0;
    double total_comp = 0.0;
    const auto add = [&](double x) {
      const double t = total + x;
      if (std::fabs(total) >= std::fabs(x)) total_comp += (total - t) + x;
      else total_comp += (x - t) + total;
      total = t;
    };
    for (int i = 0; i < 4; ++i) add(s[i]);
    tail(add);
    for (int i = 0; i < 4; ++i) total_comp += c[i];
    return total + total_comp;
  }
};

}  // namespace

std::size_t ball_kernel(int m, double s, const BallBatch& batch, std::span<double> e, std::span<double> coef) {
  if (m < 1) throw std::invalid_argument("ball_kernel: dimension must be >= 1");
  if (m % 2 != 0) return scalar::ball_kernel(m, s, batch, e, coef);

  const std::size_t n = batch.size();
  const bool want_coef = !coef.empty();
  const int k = m / 2;
  std::size_t first_bad = npos;

  const __m256d vs = _mm256_set1_pd(s);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d half = _mm256_set1_pd(0.5);

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(batch.along.data() + i);
    const __m256d d = _mm256_sub_pd(vs, _mm256_loadu_pd(batch.mean_sq.data() + i));
    const __m256d inv_scale = _mm256_loadu_pd(batch.inv_scale.data() + i);

    const __m256d ok = _mm256_cmp_pd(d, zero, _CMP_GT_OQ);
    const int ok_mask = _mm256_movemask_pd(ok);
    if (ok_mask != 0xF && first_bad == npos) {
      for (int lane = 0; lane < 4; ++lane) {
        if (!(ok_mask & (1 << lane))) {
          first_bad = i + static_cast<std::size_t>(lane);
          break;
        }
      }
    }
    const __m256d d_safe = _mm256_blendv_pd(one, d, ok);

    const __m256d root = _mm256_sqrt_pd(_mm256_fmadd_pd(a, a, d_safe));
    const __m256d t_pos = _mm256_div_pd(d_safe, _mm256_add_pd(root, a));
    const __m256d t_neg = _mm256_sub_pd(root, a);
    const __m256d t = _mm256_blendv_pd(t_neg, t_pos, _mm256_cmp_pd(a, zero, _CMP_GT_OQ));
    const __m256d rho = _mm256_mul_pd(t, inv_scale);

    const __m256d y = _mm256_mul_pd(half, _mm256_mul_pd(rho, rho));
    const __m256d ey = exp_nonpositive(_mm256_sub_pd(zero, y));

    // term_j = y^j / j!, accumulated in the same order as the scalar kernel.
    __m256d term = one;
    __m256d partial = one;
    for (int j = 1; j < k; ++j) {
      term = _mm256_mul_pd(term, _mm256_div_pd(y, _mm256_set1_pd(static_cast<double>(j))));
      partial = _mm256_add_pd(partial, term);
    }
    const __m256d ev = _mm256_and_pd(ok, _mm256_sub_pd(one, _mm256_mul_pd(ey, partial)));
    _mm256_storeu_pd(e.data() + i, ev);

    if (want_coef) {
      // After the loop `term` holds y^{k-1}/(k-1)!.
      __m256d c = _mm256_mul_pd(_mm256_mul_pd(rho, term), ey);
      c = _mm256_div_pd(_mm256_mul_pd(c, inv_scale), root);
      _mm256_storeu_pd(coef.data() + i, _mm256_and_pd(ok, c));
    }
  }

  if (i < n) {
    const BallBatch tail{batch.along.subspan(i), batch.mean_sq.subspan(i), batch.inv_scale.subspan(i)};
    const std::size_t bad =
        scalar::ball_kernel(m, s, tail, e.subspan(i), want_coef ? coef.subspan(i) : std::span<double>{});
    if (first_bad == npos && bad != npos) first_bad = i + bad;
  }
  return first_bad;
}

double compensated_sum(std::span<const double> values) {
  Neumaier4 acc;
  const std::size_t n = values.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc.add(_mm256_loadu_pd(values.data() + i));
  return acc.finish([&](auto&& add) {
    for (std::size_t j = i; j < n; ++j) add(values[j]);
  });
}

double sum_squared_deviation(std::span<const double> values, double mean) {
  Neumaier4 acc;
  const __m256d vm = _mm256_set1_pd(mean);
  const std::size_t n = values.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(values.data() + i), vm);
    acc.add(_mm256_mul_pd(d, d));
  }
  return acc.finish([&](auto&& add) {
    for (std::size_t j = i; j < n; ++j) {
      const double d = values[j] - mean;
      add(d * d);
    }
  });
}

double sum_cross_deviation(std::span<const double> a, double mean_a, std::span<const double> b, double mean_b) {
  Neumaier4 acc;
  const __m256d ma = _mm256_set1_pd(mean_a);
  const __m256d mb = _mm256_set1_pd(mean_b);
  const std::size_t n = a.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d da = _mm256_sub_pd(_mm256_loadu_pd(a.data() + i), ma);
    const __m256d db = _mm256_sub_pd(_mm256_loadu_pd(b.data() + i), mb);
    acc.add(_mm256_mul_pd(da, db));
  }
  return acc.finish([&](auto&& add) {
    for (std::size_t j = i; j < n; ++j) add((a[j] - mean_a) * (b[j] - mean_b));
  });
}

}  // namespace srd::kernels::avx2
