import numpy as np
import pytest

import packimb as pi


def reference_cycle():
    """CC charge to 4.2 V, CV hold to 83 mA, CC discharge to 3.0 V."""
    return pi.Protocol(
        steps=(
            pi.CCStep(current_a=-1.67, until=pi.VoltageReached(4.2)),
            pi.CVStep(setpoint_v=4.2, cutoff_a=0.083),
            pi.CCStep(current_a=1.67, until=pi.VoltageReached(3.0)),
        ),
        initial_state=pi.PackState(0.0, 0.25, 0.30),
    )


@pytest.fixture(scope="module")
def cycle_series():
    model = pi.AffineOcv(3.0, 1.2)
    pack = pi.PackParams(
        cell_a=pi.CellParams(5.0, 0.05, model),
        cell_b=pi.CellParams(5.6, 0.033, model),
    )
    return pi.run_protocol(pack, reference_cycle(), pi.IntegratorConfig())


class TestSteps:
    def test_cv_cutoff_validation(self):
        with pytest.raises(ValueError):
            pi.CVStep(setpoint_v=4.2, cutoff_a=-0.1)

    def test_rest_duration_validation(self):
        with pytest.raises(ValueError):
            pi.RestStep(duration_h=-1.0)

    def test_empty_protocol_rejected(self):
        with pytest.raises(ValueError):
            pi.Protocol(steps=(), initial_state=pi.PackState(0.0, 0.5, 0.5))


class TestRunProtocol:
    def test_three_legs(self, cycle_series):
        kinds = [lg.kind for lg in cycle_series.legs]
        assert kinds == ["cc", "cv", "cc"]

    def test_boundary_continuity(self, cycle_series):
        for lg in cycle_series.legs[1:]:
            k = lg.start
            assert cycle_series.t[k] == cycle_series.t[k - 1]
            assert cycle_series.z_a[k] == cycle_series.z_a[k - 1]
            assert cycle_series.z_b[k] == cycle_series.z_b[k - 1]

    def test_time_monotone(self, cycle_series):
        assert np.all(np.diff(cycle_series.t) >= 0)
        for idx in range(len(cycle_series.legs)):
            leg = cycle_series.leg(idx)
            assert np.all(np.diff(leg.t) > 0)

    def test_cv_between_cc(self, cycle_series):
        cv = cycle_series.leg(1)
        assert np.all(cv.v_t == 4.2)
        assert abs(cv.i_total[-1]) < 0.083

    def test_rest_step_runs_as_zero_current(self, fig2_pack):
        protocol = pi.Protocol(
            steps=(pi.RestStep(duration_h=0.1),),
            initial_state=pi.PackState(0.0, 0.5, 0.45),
        )
        series = pi.run_protocol(fig2_pack, protocol, pi.IntegratorConfig())
        assert series.legs[0].kind == "rest"
        assert np.all(series.applied_i == 0.0)
        assert series.t[-1] == pytest.approx(0.1)

    def test_failure_carries_step_index(self, fig2_pack):
        protocol = pi.Protocol(
            steps=(
                pi.RestStep(duration_h=0.01),
                # charging an almost-full pack forever must blow the SOC range
                pi.CCStep(current_a=-5.0, until=pi.TimeElapsed(10.0)),
            ),
            initial_state=pi.PackState(0.0, 0.98, 0.98),
        )
        with pytest.raises(pi.ProtocolError) as err:
            pi.run_protocol(fig2_pack, protocol, pi.IntegratorConfig())
        assert err.value.step_index == 1
        assert isinstance(err.value.cause, pi.SocDomainError)


class TestSummary:
    def test_end_of_charge_near_steady_state(self, cycle_series, fig2_pack):
        # the charge leg spans a wide SOC window, so dz at the voltage
        # ceiling should be close to the analytic steady state kappa * I
        summary = pi.summarize_cycle(cycle_series)
        sol = pi.galvanostatic_solution(fig2_pack, -0.05, -1.67)
        assert summary.dz_end_of_charge == pytest.approx(sol.dz_ss, rel=0.05)
        assert summary.di_end_of_charge == pytest.approx(sol.di_ss, rel=0.05)

    def test_discharge_fields_none_without_discharge(self, fig2_pack):
        protocol = pi.Protocol(
            steps=(pi.CCStep(current_a=-1.67, until=pi.VoltageReached(4.2)),),
            initial_state=pi.PackState(0.0, 0.25, 0.30),
        )
        series = pi.run_protocol(fig2_pack, protocol, pi.IntegratorConfig())
        summary = pi.summarize_cycle(series)
        assert summary.dz_end_of_discharge is None
        assert summary.di_end_of_discharge is None
        d = summary.to_dict()
        assert d["dz_end_of_discharge"] is None

    def test_symmetric_pack_all_zero(self, identical_pack):
        protocol = pi.Protocol(
            steps=(
                pi.CCStep(current_a=-1.67, until=pi.VoltageReached(4.2)),
                pi.CCStep(current_a=1.67, until=pi.VoltageReached(3.0)),
            ),
            initial_state=pi.PackState(0.0, 0.3, 0.3),
        )
        series = pi.run_protocol(identical_pack, protocol, pi.IntegratorConfig())
        summary = pi.summarize_cycle(series)
        assert summary.dz_end_of_charge == 0.0
        assert summary.di_end_of_charge == 0.0
        assert summary.dz_end_of_discharge == 0.0
        assert summary.di_end_of_discharge == 0.0

    def test_no_charge_leg_is_error(self, fig2_pack):
        protocol = pi.Protocol(
            steps=(pi.RestStep(duration_h=0.01),),
            initial_state=pi.PackState(0.0, 0.5, 0.5),
        )
        series = pi.run_protocol(fig2_pack, protocol, pi.IntegratorConfig())
        with pytest.raises(pi.SeriesStructureError):
            pi.summarize_cycle(series)

    def test_discharge_spike_smaller_than_charge_spike(self, cycle_series):
        # after the CV hold has rebalanced the cells, stepping into
        # discharge produces a smaller current-imbalance jump than the
        # initial charge transient did
        charge = cycle_series.leg(0)
        discharge = cycle_series.leg(2)
        assert abs(discharge.di[0]) < abs(charge.di[0])
