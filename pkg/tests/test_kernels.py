import numpy as np
import pytest

from relestim import PsiKernel, fixed_scale, mad_scale
from relestim.exceptions import DegenerateScale

ALL_KERNELS = [PsiKernel.identity(), PsiKernel.huber(), PsiKernel.tukey(),
               PsiKernel.huber(1.0), PsiKernel.tukey(2.5)]


def grid_for(kernel):
    k = kernel.tuning if kernel.kind != "identity" else 1.0
    r = np.linspace(-10 * k, 10 * k, 4001)
    if kernel.kind == "huber":
        # Keep the 1e-3 neighborhoods of the psi kinks out of the
        # finite-difference comparison.
        r = r[np.minimum(np.abs(r - k), np.abs(r + k)) > 1e-3]
    return r


class TestRho:
    def test_huber_at_zero(self):
        assert PsiKernel.huber(1.345).rho(0.0) == 0.0

    def test_tukey_saturates(self):
        # beyond the tuning constant rho is k^2/6
        assert PsiKernel.tukey(4.685).rho(10.0) == pytest.approx(3.658204166666666, abs=1e-12)

    def test_huber_linear_branch(self):
        # 1.345*3 - 1.345^2/2, evaluated by hand
        assert PsiKernel.huber(1.345).rho(3.0) == pytest.approx(3.1304875, abs=1e-12)

    def test_identity_is_half_square(self):
        r = np.linspace(-3, 3, 13)
        assert np.allclose(PsiKernel.identity().rho(r), 0.5 * r**2)

    @pytest.mark.parametrize("kernel", ALL_KERNELS, ids=str)
    def test_even_and_nonnegative(self, kernel):
        r = grid_for(kernel)
        rho = kernel.rho(r)
        assert np.array_equal(kernel.rho(-r), rho)
        assert (rho >= 0).all()
        assert kernel.rho(0.0) == 0.0

    @pytest.mark.parametrize("kernel", ALL_KERNELS, ids=str)
    def test_nondecreasing_on_positive_axis(self, kernel):
        k = kernel.tuning if kernel.kind != "identity" else 1.0
        r = np.linspace(0, 10 * k, 2001)
        assert (np.diff(kernel.rho(r)) >= 0).all()


class TestPsi:
    def test_huber_identity_branch(self):
        assert PsiKernel.huber(1.345).psi(0.5) == 0.5

    def test_tukey_redescends_to_zero(self):
        assert PsiKernel.tukey(4.685).psi(6.0) == 0.0

    def test_tukey_inside(self):
        # (1 - (1/4.685)^2)^2, evaluated by hand
        assert PsiKernel.tukey(4.685).psi(1.0) == pytest.approx(0.9109562955029199, abs=1e-12)

    @pytest.mark.parametrize("kernel", ALL_KERNELS, ids=str)
    def test_odd(self, kernel):
        r = grid_for(kernel)
        assert np.array_equal(kernel.psi(-r), -kernel.psi(r))
        assert kernel.psi(0.0) == 0.0

    @pytest.mark.parametrize("kernel", ALL_KERNELS, ids=str)
    def test_matches_finite_difference_of_rho(self, kernel):
        r = grid_for(kernel)
        k = kernel.tuning if kernel.kind != "identity" else 1.0
        h = 1e-5 * k
        fd = (kernel.rho(r + h) - kernel.rho(r - h)) / (2 * h)
        assert np.allclose(fd, kernel.psi(r), rtol=1e-6, atol=1e-7 * k)

    def test_huber_bounded(self):
        kernel = PsiKernel.huber(1.345)
        r = grid_for(kernel)
        assert (np.abs(kernel.psi(r)) <= 1.345).all()

    def test_tukey_vanishes_beyond_tuning_exactly(self):
        kernel = PsiKernel.tukey(4.685)
        r = np.linspace(4.685 + 1e-12, 100, 500)
        assert (kernel.psi(r) == 0.0).all()
        assert (kernel.psi(-r) == 0.0).all()


class TestRho0:
    def test_identity(self):
        # r*psi - rho = r^2/2 for the identity kernel
        assert PsiKernel.identity().rho0(2.0) == 2.0

    @pytest.mark.parametrize("kernel", ALL_KERNELS, ids=str)
    def test_zero_at_zero(self, kernel):
        assert kernel.rho0(0.0) == 0.0

    def test_huber_saturated(self):
        # 3*1 - (3 - 0.5) = 0.5 at k=1
        assert PsiKernel.huber(1.0).rho0(3.0) == pytest.approx(0.5, abs=1e-12)


class TestWeights:
    @pytest.mark.parametrize("kernel", ALL_KERNELS, ids=str)
    def test_matches_psi_over_r(self, kernel):
        r = grid_for(kernel)
        r = r[np.abs(r) > 1e-8]
        assert np.allclose(kernel.weights(r), kernel.psi(r) / r, rtol=1e-12)

    @pytest.mark.parametrize("kernel", ALL_KERNELS, ids=str)
    def test_limit_at_zero(self, kernel):
        assert kernel.weights(0.0) == 1.0


class TestScale:
    def test_mad_simple(self):
        est = mad_scale([-1.0, 0.0, 1.0])
        assert est.sigma == pytest.approx(1.0 / 0.6745, rel=1e-12)
        assert est.method == "mad"

    def test_mad_symmetric(self):
        assert mad_scale([-2, -1, 0, 1, 2]).sigma == pytest.approx(1.0 / 0.6745, rel=1e-12)

    def test_degenerate(self):
        with pytest.raises(DegenerateScale):
            mad_scale([5.0, 5.0, 5.0])

    def test_too_few(self):
        with pytest.raises(DegenerateScale):
            mad_scale([3.0])

    def test_fixed(self):
        assert fixed_scale(2.5).sigma == 2.5
        assert fixed_scale(2.5).method == "fixed"
        with pytest.raises(ValueError):
            fixed_scale(0.0)

    def test_kernel_validation(self):
        with pytest.raises(ValueError):
            PsiKernel("huber", 0.0)
        with pytest.raises(ValueError):
            PsiKernel("lorentz", 1.0)
