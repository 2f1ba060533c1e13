#pragma once

// Internal extended-precision scalars for the pre-limit combinatorial sums.
// Terms of those sums reach (sum_a |Q_a|)^n in magnitude while the totals stay
// O(1), so the accumulation precision must scale with n; doubles stop being
// enough near n ~ 50 and the acceptance ladders go to n = 160 / 400.

#include <mpfr.h>

#include <cmath>
#include <cstdint>

namespace qsg::detail {

class Big {
  public:
    Big() { mpfr_init2(v_, 64); mpfr_set_zero(v_, 1); }
    explicit Big(mpfr_prec_t prec) { mpfr_init2(v_, prec); mpfr_set_zero(v_, 1); }
    Big(const Big& o) { mpfr_init2(v_, mpfr_get_prec(o.v_)); mpfr_set(v_, o.v_, MPFR_RNDN); }
    Big(Big&& o) noexcept { mpfr_init2(v_, mpfr_get_prec(o.v_)); mpfr_swap(v_, o.v_); }
    Big& operator=(const Big& o) {
        if (this != &o) {
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }
    Big& operator=(Big&& o) noexcept {
        mpfr_swap(v_, o.v_);
        return *this;
    }
    ~Big() { mpfr_clear(v_); }

    mpfr_ptr get() { return v_; }
    mpfr_srcptr get() const { return v_; }
    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

  private:
    mpfr_t v_;
};

// Complex value as a (re, im) pair of Bigs.
struct BigC {
    Big re, im;
    BigC() = default;
    explicit BigC(mpfr_prec_t prec) : re(prec), im(prec) {}
};

// dst = a * b with one scratch register (dst must not alias a or b).
inline void cmul(BigC& dst, const BigC& a, const BigC& b, Big& scratch) {
    mpfr_mul(dst.re.get(), a.re.get(), b.re.get(), MPFR_RNDN);
    mpfr_mul(scratch.get(), a.im.get(), b.im.get(), MPFR_RNDN);
    mpfr_sub(dst.re.get(), dst.re.get(), scratch.get(), MPFR_RNDN);
    mpfr_mul(dst.im.get(), a.re.get(), b.im.get(), MPFR_RNDN);
    mpfr_mul(scratch.get(), a.im.get(), b.re.get(), MPFR_RNDN);
    mpfr_add(dst.im.get(), dst.im.get(), scratch.get(), MPFR_RNDN);
}

// dst = a * r for real r.
inline void cmul_real(BigC& dst, const BigC& a, const Big& r) {
    mpfr_mul(dst.re.get(), a.re.get(), r.get(), MPFR_RNDN);
    mpfr_mul(dst.im.get(), a.im.get(), r.get(), MPFR_RNDN);
}

inline void cadd(BigC& dst, const BigC& a) {
    mpfr_add(dst.re.get(), dst.re.get(), a.re.get(), MPFR_RNDN);
    mpfr_add(dst.im.get(), dst.im.get(), a.im.get(), MPFR_RNDN);
}

}  // namespace qsg::detail
