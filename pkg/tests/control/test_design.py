"""
Tests for Controller Design
"""

import numpy as np
import pytest

from src.control.design import (
    ControllerDesignError,
    ControllerGains,
    control_output,
    controllability_matrix,
    design_controller,
    feedforward_gain,
    place_gains,
)
from src.models.scenario import PlantModel

DOUBLE_INTEGRATOR_PHI = np.array([[1.0, 1.0], [0.0, 1.0]])
DOUBLE_INTEGRATOR_GAMMA = np.array([0.0, 1.0])
DC_POLES = (0.8 + 0.3j, 0.8 - 0.3j)


class TestPlaceGains:
    """Tests for Ackermann pole placement."""

    def test_double_integrator_deadbeat_half(self):
        k = place_gains(DOUBLE_INTEGRATOR_PHI, DOUBLE_INTEGRATOR_GAMMA, (0.5, 0.5))

        np.testing.assert_allclose(k, [0.25, 1.0], atol=1e-12)

    def test_companion_form_repeated_pole(self):
        phi = np.array([[0.0, 1.0], [-0.02, 0.3]])
        gamma = np.array([0.0, 1.0])

        k = place_gains(phi, gamma, (0.1, 0.1))

        np.testing.assert_allclose(k, [-0.01, 0.1], atol=1e-12)
        closed = phi - np.outer(gamma, k)
        np.testing.assert_allclose(np.poly(closed), [1.0, -0.2, 0.01], atol=1e-12)

    def test_already_placed_poles_need_no_feedback(self):
        phi = np.array([[0.9, 0.1], [0.0, 0.8]])
        gamma = np.array([0.0, 1.0])

        k = place_gains(phi, gamma, (0.9, 0.8))

        np.testing.assert_allclose(k, [0.0, 0.0], atol=1e-12)

    def test_uncontrollable_pair_rejected(self):
        phi = np.diag([0.5, 0.7])
        gamma = np.array([1.0, 0.0])

        with pytest.raises(ControllerDesignError, match="not controllable"):
            place_gains(phi, gamma, (0.1, 0.2))

    def test_pole_count_must_match_order(self):
        with pytest.raises(ControllerDesignError):
            place_gains(DOUBLE_INTEGRATOR_PHI, DOUBLE_INTEGRATOR_GAMMA, (0.5,))

    def test_controllability_matrix_columns(self):
        wc = controllability_matrix(DOUBLE_INTEGRATOR_PHI, DOUBLE_INTEGRATOR_GAMMA)
        np.testing.assert_array_equal(wc, [[0.0, 1.0], [1.0, 1.0]])


class TestFeedforward:
    """Tests for feedforward_gain."""

    def test_unit_dc_gain(self):
        k = np.array([0.25, 1.0])
        nff = feedforward_gain(DOUBLE_INTEGRATOR_PHI, DOUBLE_INTEGRATOR_GAMMA, k, np.array([1.0, 0.0]))
        assert nff == pytest.approx(0.25, abs=1e-12)

    def test_scalar_like_case(self):
        nff = feedforward_gain(np.eye(2) * 0.5, np.array([1.0, 0.0]), np.zeros(2), np.array([1.0, 0.0]))
        assert nff == pytest.approx(0.5, abs=1e-12)

    def test_zero_dc_gain_rejected(self):
        k = np.array([0.25, 1.0])
        with pytest.raises(ControllerDesignError, match="zero closed-loop DC gain"):
            feedforward_gain(DOUBLE_INTEGRATOR_PHI, DOUBLE_INTEGRATOR_GAMMA, k, np.array([0.0, 1.0]))

    def test_closed_loop_pole_at_one_rejected(self):
        k = place_gains(DOUBLE_INTEGRATOR_PHI, DOUBLE_INTEGRATOR_GAMMA, (1.0, 0.5))
        with pytest.raises(ControllerDesignError, match="singular"):
            feedforward_gain(DOUBLE_INTEGRATOR_PHI, DOUBLE_INTEGRATOR_GAMMA, k, np.array([1.0, 0.0]))


class TestDesignController:
    """Tests for design_controller on the DC motor."""

    @pytest.mark.parametrize("h", [0.0032, 0.01, 0.012, 0.02])
    def test_closed_loop_eigenvalues(self, dc_motor, h):
        gains = design_controller(dc_motor, DC_POLES, h)

        eigenvalues = sorted(np.linalg.eigvals(gains.closed_loop), key=lambda z: z.imag)

        assert abs(eigenvalues[0] - (0.8 - 0.3j)) < 1e-9
        assert abs(eigenvalues[1] - (0.8 + 0.3j)) < 1e-9

    def test_step_response_settles_at_reference(self, dc_motor):
        gains = design_controller(dc_motor, DC_POLES, 0.01)
        _, _, c = dc_motor.matrices()
        x = np.zeros(2)

        for _ in range(200):
            u = control_output(gains, x, 1.0)
            x = gains.phi @ x + gains.gamma * u

        assert float(c @ x) == pytest.approx(1.0, abs=1e-9)

    def test_reference_is_an_equilibrium(self, dc_motor):
        gains = design_controller(dc_motor, DC_POLES, 0.012)
        x = np.array([0.0, 1.0])

        u = control_output(gains, x, 1.0)

        np.testing.assert_allclose(gains.phi @ x + gains.gamma * u, x, atol=1e-9)

    def test_returning_to_a_period_reuses_gains(self, dc_motor):
        first = design_controller(dc_motor, DC_POLES, 0.01)
        design_controller(dc_motor, DC_POLES, 0.012)
        again = design_controller(dc_motor, DC_POLES, 0.01)

        np.testing.assert_array_equal(first.k, again.k)
        assert first.nff == again.nff

    def test_gain_arrays_are_read_only(self, dc_motor):
        gains = design_controller(dc_motor, DC_POLES, 0.01)
        with pytest.raises(ValueError):
            gains.k[0] = 0.0

    def test_errors_name_the_loop(self):
        plant = PlantModel(a=((-1.0, 0.0), (0.0, -2.0)), b=(1.0, 0.0), c=(1.0, 1.0))

        with pytest.raises(ControllerDesignError, match=r"^loop 3: ") as excinfo:
            design_controller(plant, (0.5, 0.6), 0.01, loop_id=2)

        assert excinfo.value.loop_id == 2


class TestControlOutput:
    def test_law(self):
        gains = ControllerGains(
            k=np.array([2.0, 3.0]), nff=4.0, h=0.01,
            phi=np.eye(2), gamma=np.array([1.0, 0.0]),
        )
        assert control_output(gains, np.array([1.0, -1.0]), 0.5) == pytest.approx(3.0)

    def test_hand_arithmetic(self):
        gains = ControllerGains(
            k=np.array([1.0, 2.0]), nff=3.0, h=0.01,
            phi=np.eye(2), gamma=np.array([1.0, 0.0]),
        )
        assert control_output(gains, np.array([1.0, 1.0]), 1.0) == 0.0
        assert control_output(gains, np.zeros(2), 0.0) == 0.0
