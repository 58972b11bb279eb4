"""Pairwise interaction rules: worked cases and algebraic invariants.

The numeric expectations are hand evaluations of each rule frozen into
the tests; the hypothesis properties cover conservation, direction,
no-overshoot guards, and symmetry away from exact ties.
"""

import math

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from peerbalance.protocols import (
    OwaRegisters,
    SwtConfig,
    fixed_quantum_interact,
    owa_interact,
    ows_interact,
    swt_interact,
)

energy_st = st.floats(min_value=0.0, max_value=1e5, allow_nan=False)
weight_st = st.floats(min_value=0.01, max_value=100.0, allow_nan=False)
beta_st = st.floats(min_value=0.0, max_value=0.95, allow_nan=False)


def relative_gap(eps_u, w_u, eps_v, w_v):
    return abs(eps_u / w_u - eps_v / w_v)


def clearly_apart(eps_u, w_u, eps_v, w_v):
    """True when the pair's relative energies are separated beyond float fuzz."""
    scale = abs(eps_u / w_u) + abs(eps_v / w_v) + 1.0
    return relative_gap(eps_u, w_u, eps_v, w_v) > 1e-6 * scale


class TestOwsInteract:
    def test_equal_weight_averaging(self):
        out = ows_interact(4.0, 1.0, 2.0, 1.0, 0.0)
        assert (out.new_energy_u, out.new_energy_v) == (3.0, 3.0)
        assert out.useful

    def test_balanced_pair_is_fixed(self):
        out = ows_interact(6.0, 2.0, 3.0, 1.0, 0.0)
        assert (out.new_energy_u, out.new_energy_v) == (6.0, 3.0)
        assert out.transferred == 0.0
        assert not out.useful

    def test_weighted_shares(self):
        out = ows_interact(0.0, 1.0, 9.0, 2.0, 0.0)
        assert out.new_energy_u == pytest.approx(3.0, abs=1e-12)
        assert out.new_energy_v == pytest.approx(6.0, abs=1e-12)

    def test_lossy_transfer(self):
        out = ows_interact(10.0, 1.0, 2.0, 1.0, 0.2)
        assert out.transferred == pytest.approx(4.0, abs=1e-12)
        assert out.new_energy_u == pytest.approx(6.0, abs=1e-12)
        assert out.new_energy_v == pytest.approx(5.2, abs=1e-12)
        assert out.lost == pytest.approx(0.8, abs=1e-12)

    def test_threshold_suppresses_small_gaps(self):
        quiet = ows_interact(10.0, 1.0, 2.0, 1.0, 0.0, threshold=10.0)
        assert not quiet.useful
        fired = ows_interact(10.0, 1.0, 2.0, 1.0, 0.0, threshold=1.0)
        assert fired.useful

    @given(
        eps_u=energy_st, w_u=weight_st, eps_v=energy_st, w_v=weight_st, beta=beta_st
    )
    def test_conservation_and_direction(self, eps_u, w_u, eps_v, w_v, beta):
        out = ows_interact(eps_u, w_u, eps_v, w_v, beta)
        before = eps_u + eps_v
        after = out.new_energy_u + out.new_energy_v
        assert math.isclose(
            before - after, beta * out.transferred, rel_tol=1e-9, abs_tol=1e-9
        )
        assert out.lost == beta * out.transferred
        assert out.new_energy_u >= -1e-9 and out.new_energy_v >= -1e-9
        if out.useful:
            # the relatively richer side pays
            if eps_u / w_u > eps_v / w_v:
                assert out.new_energy_u < eps_u
            else:
                assert out.new_energy_v < eps_v

    @given(eps_u=energy_st, w_u=weight_st, eps_v=energy_st, w_v=weight_st, beta=beta_st)
    def test_symmetry(self, eps_u, w_u, eps_v, w_v, beta):
        assume(clearly_apart(eps_u, w_u, eps_v, w_v))
        ab = ows_interact(eps_u, w_u, eps_v, w_v, beta)
        ba = ows_interact(eps_v, w_v, eps_u, w_u, beta)
        assert ab.new_energy_u == ba.new_energy_v
        assert ab.new_energy_v == ba.new_energy_u
        assert ab.transferred == ba.transferred

    @given(eps_u=energy_st, w_u=weight_st, eps_v=energy_st, w_v=weight_st)
    def test_lossless_lands_on_weighted_shares(self, eps_u, w_u, eps_v, w_v):
        out = ows_interact(eps_u, w_u, eps_v, w_v, 0.0)
        if out.useful:
            share_u = w_u * (eps_u + eps_v) / (w_u + w_v)
            assert math.isclose(
                out.new_energy_u, share_u, rel_tol=1e-9, abs_tol=1e-9
            )


class TestSwtInteract:
    CFG = SwtConfig(0.01)

    def test_equal_relative_energy_does_nothing(self):
        for beta in (0.0, 0.2, 0.8):
            out = swt_interact(5.0, 1.0, 5.0, 1.0, beta, self.CFG)
            assert not out.useful

    def test_quantum_from_richer_side(self):
        out = swt_interact(10.0, 1.0, 2.0, 1.0, 0.2, self.CFG)
        assert out.transferred == pytest.approx(0.08, abs=1e-15)
        assert out.new_energy_u == pytest.approx(9.92, abs=1e-12)
        assert out.new_energy_v == pytest.approx(2.064, abs=1e-12)

    def test_both_guards_can_fail(self):
        # a coarse quantum on a nearly balanced pair would overshoot, so
        # neither branch fires and the pair is left alone
        out = swt_interact(1.00, 1.0, 0.99, 1.0, 0.2, SwtConfig(1.0))
        assert not out.useful
        assert (out.new_energy_u, out.new_energy_v) == (1.00, 0.99)

    def test_quantum_scale_must_be_positive(self):
        with pytest.raises(ValueError):
            SwtConfig(0.0)
        with pytest.raises(ValueError):
            SwtConfig(-0.01)

    @given(
        eps_u=energy_st, w_u=weight_st, eps_v=energy_st, w_v=weight_st, beta=beta_st
    )
    def test_no_overshoot_and_no_negative(self, eps_u, w_u, eps_v, w_v, beta):
        out = swt_interact(eps_u, w_u, eps_v, w_v, beta, self.CFG)
        assert out.new_energy_u >= -1e-12 and out.new_energy_v >= -1e-12
        if out.useful:
            # the branch guards keep the sender relatively richer-or-equal,
            # so relative order never flips
            before = eps_u / w_u - eps_v / w_v
            after = out.new_energy_u / w_u - out.new_energy_v / w_v
            scale = abs(before) + 1.0
            assert before * after >= -1e-9 * scale
            assert math.isclose(
                (eps_u + eps_v) - (out.new_energy_u + out.new_energy_v),
                beta * out.transferred,
                rel_tol=1e-9,
                abs_tol=1e-9,
            )

    @given(
        eps_u=energy_st, w_u=weight_st, eps_v=energy_st, w_v=weight_st, beta=beta_st
    )
    def test_symmetry_away_from_guard_boundaries(self, eps_u, w_u, eps_v, w_v, beta):
        amount = relative_gap(eps_u, w_u, eps_v, w_v) * self.CFG.d_epsilon
        margin = abs((eps_u - amount) / w_u - (eps_v + amount) / w_v)
        scale = abs(eps_u / w_u) + abs(eps_v / w_v) + 1.0
        assume(margin > 1e-6 * scale)
        assume(
            abs((eps_u + amount) / w_u - (eps_v - amount) / w_v) > 1e-6 * scale
        )
        ab = swt_interact(eps_u, w_u, eps_v, w_v, beta, self.CFG)
        ba = swt_interact(eps_v, w_v, eps_u, w_u, beta, self.CFG)
        assert ab.useful == ba.useful
        if ab.useful:
            assert ab.new_energy_u == ba.new_energy_v
            assert ab.new_energy_v == ba.new_energy_u


class TestOwaInteract:
    def test_transfer_when_exactly_one_side_looks_rich(self):
        out, reg_u, reg_v = owa_interact(
            10.0, 1.0, OwaRegisters(10.0, 1.0),
            2.0, 1.0, OwaRegisters(2.0, 1.0),
            0.2,
        )
        assert reg_u == OwaRegisters(12.0, 2.0)
        assert reg_v == OwaRegisters(12.0, 2.0)
        assert out.transferred == pytest.approx(4.0, abs=1e-12)
        assert out.new_energy_u == pytest.approx(6.0, abs=1e-12)
        assert out.new_energy_v == pytest.approx(5.2, abs=1e-12)

    def test_registers_update_even_without_transfer(self):
        out, reg_u, reg_v = owa_interact(
            2.0, 1.0, OwaRegisters(20.0, 2.0),
            2.0, 1.0, OwaRegisters(20.0, 2.0),
            0.2,
        )
        assert not out.useful
        assert reg_u == OwaRegisters(22.0, 3.0)
        assert reg_v == OwaRegisters(22.0, 3.0)
        assert (out.new_energy_u, out.new_energy_v) == (2.0, 2.0)

    def test_both_rich_means_no_transfer(self):
        # both agents sit above their own estimates, which fails the
        # exactly-one-side condition
        out, _, _ = owa_interact(
            10.0, 1.0, OwaRegisters(1.0, 1.0),
            10.0, 1.0, OwaRegisters(1.0, 1.0),
            0.0,
        )
        assert not out.useful

    @given(
        eps_u=energy_st,
        w_u=weight_st,
        eps_v=energy_st,
        w_v=weight_st,
        beta=beta_st,
        nrg_u=st.floats(min_value=0.0, max_value=1e6, allow_nan=False),
        nrg_v=st.floats(min_value=0.0, max_value=1e6, allow_nan=False),
        wt_u=st.floats(min_value=0.01, max_value=1e3, allow_nan=False),
        wt_v=st.floats(min_value=0.01, max_value=1e3, allow_nan=False),
    )
    def test_register_additivity_and_conservation(
        self, eps_u, w_u, eps_v, w_v, beta, nrg_u, nrg_v, wt_u, wt_v
    ):
        out, reg_u, reg_v = owa_interact(
            eps_u, w_u, OwaRegisters(nrg_u, wt_u),
            eps_v, w_v, OwaRegisters(nrg_v, wt_v),
            beta,
        )
        # registers fold in the peer's pre-interaction state, exactly
        assert reg_u.nrg == nrg_u + eps_v and reg_u.wt == wt_u + w_v
        assert reg_v.nrg == nrg_v + eps_u and reg_v.wt == wt_v + w_u
        assert reg_u.nrg >= nrg_u and reg_u.wt > wt_u
        assert math.isclose(
            (eps_u + eps_v) - (out.new_energy_u + out.new_energy_v),
            beta * out.transferred,
            rel_tol=1e-9,
            abs_tol=1e-9,
        )
        assert out.new_energy_u >= -1e-9 and out.new_energy_v >= -1e-9

    @given(
        eps_u=energy_st, w_u=weight_st, eps_v=energy_st, w_v=weight_st, beta=beta_st
    )
    def test_symmetry_with_fresh_registers(self, eps_u, w_u, eps_v, w_v, beta):
        assume(clearly_apart(eps_u, w_u, eps_v, w_v))
        ab, _, _ = owa_interact(
            eps_u, w_u, OwaRegisters(eps_u, w_u),
            eps_v, w_v, OwaRegisters(eps_v, w_v),
            beta,
        )
        ba, _, _ = owa_interact(
            eps_v, w_v, OwaRegisters(eps_v, w_v),
            eps_u, w_u, OwaRegisters(eps_u, w_u),
            beta,
        )
        assert ab.useful == ba.useful
        assert ab.new_energy_u == ba.new_energy_v
        assert ab.new_energy_v == ba.new_energy_u


class TestFixedQuantumInteract:
    def test_fires_above_the_quantum_gap(self):
        out = fixed_quantum_interact(5.0, 3.0, 0.2, 0.5)
        assert out.transferred == 0.5
        assert out.new_energy_u == pytest.approx(4.5, abs=1e-15)
        assert out.new_energy_v == pytest.approx(3.4, abs=1e-15)

    def test_poorer_first_argument_receives(self):
        out = fixed_quantum_interact(3.0, 5.0, 0.0, 0.5)
        assert out.new_energy_u == pytest.approx(3.5, abs=1e-15)
        assert out.new_energy_v == pytest.approx(4.5, abs=1e-15)

    def test_gap_at_or_below_quantum_is_quiet(self):
        assert not fixed_quantum_interact(3.0, 3.4, 0.0, 0.5).useful
        assert not fixed_quantum_interact(3.0, 3.5, 0.0, 0.5).useful

    def test_quantum_must_be_positive(self):
        with pytest.raises(ValueError):
            fixed_quantum_interact(3.0, 5.0, 0.0, 0.0)

    @given(
        eps_u=energy_st,
        eps_v=energy_st,
        beta=beta_st,
        deps=st.floats(min_value=1e-6, max_value=10.0, allow_nan=False),
    )
    def test_flat_amount_when_useful(self, eps_u, eps_v, beta, deps):
        out = fixed_quantum_interact(eps_u, eps_v, beta, deps)
        if out.useful:
            assert out.transferred == deps
            assert out.lost == beta * deps
        else:
            assert (out.new_energy_u, out.new_energy_v) == (eps_u, eps_v)
