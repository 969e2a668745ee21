import math
from pathlib import Path

import numpy as np
import pytest

from wavefield_dvr.models import Measurement, RunLog
from wavefield_dvr.storage import ResultStore, format_value
from wavefield_dvr.waveguide.field import PulseField
from wavefield_dvr.waveguide.modes import DepthGrid


def test_result_store_initializes(tmp_path: Path) -> None:
    store = ResultStore(tmp_path / "out")
    store.ensure_layout()

    assert (tmp_path / "out" / "runs").is_dir()
    assert store.latest_run() is None


@pytest.mark.parametrize(
    ("value", "text"),
    [
        (True, "true"),
        (np.int64(42), "42"),
        (0.1 + 0.2, "0.3"),
        (1.0 / 3.0, "0.333333333333"),
        (math.nan, "nan"),
        (None, ""),
        ("noisy", "noisy"),
    ],
)
def test_format_value(value, text: str) -> None:
    assert format_value(value) == text


def test_csv_round_trip(tmp_path: Path) -> None:
    store = ResultStore(tmp_path)
    path = store.write_csv("sweep/fidelity.csv", ("frequency_hz", "fidelity"), [(10.0, 0.5), (15.0, 1.0 / 3.0)])

    assert path == tmp_path / "sweep" / "fidelity.csv"
    assert path.read_text(encoding="utf-8") == "frequency_hz,fidelity\n10,0.5\n15,0.333333333333\n"
    assert store.read_csv("sweep/fidelity.csv")[1]["fidelity"] == "0.333333333333"


def test_measurement_rows(tmp_path: Path) -> None:
    store = ResultStore(tmp_path)
    measurement = Measurement(
        values=np.array([1.0 + 2.0j, -0.5j]),
        depths=np.array([5.0, 10.0]),
        kind="noisy",
        seed=3,
    )

    store.write_measurement("cw/measurement.csv", measurement)
    rows = store.read_csv("cw/measurement.csv")

    assert [row["j"] for row in rows] == ["1", "2"]
    assert rows[0]["imag"] == "2"
    assert rows[1]["real"] == "0"
    assert rows[1]["kind"] == "noisy"
    assert rows[1]["seed"] == "3"


def test_pulse_archive_keeps_axes(tmp_path: Path) -> None:
    store = ResultStore(tmp_path)
    grid = DepthGrid(z_max=10.0, n_points=3)
    values = np.arange(12, dtype=float).reshape(4, 3) * (1.0 - 1.0j)
    pulse = PulseField(time_axis=np.linspace(0.0, 0.3, 4), grid=grid, values=values)

    path = store.save_pulse("pulse/pulse.npz", pulse)

    with np.load(path) as archive:
        assert np.array_equal(archive["depth_m"], grid.depths)
        assert np.array_equal(archive["real"] + 1j * archive["imag"], values)


def test_run_log_round_trip(tmp_path: Path) -> None:
    store = ResultStore(tmp_path)
    store.ensure_layout()
    run = RunLog(
        run_id="abc123",
        command="cw",
        config_digest="0123456789abcdef",
        seed=7,
        outputs=["cw/fidelity.csv"],
        duration_s=0.25,
        details={"frequency_hz": 500.0},
    )

    path = store.record_run(run)

    assert path.exists()
    assert store.latest_run() == path
    assert store.load_run(path) == run


def test_latest_run_follows_recording_order(tmp_path: Path) -> None:
    store = ResultStore(tmp_path)
    paths = [
        store.record_run(
            RunLog(
                run_id=run_id,
                command="modes",
                config_digest="0123456789abcdef",
                seed=None,
                outputs=[],
                duration_s=0.0,
            )
        )
        for run_id in ("zzzz", "aaaa", "mmmm")
    ]

    assert store.latest_run() == paths[-1]
    assert sorted(paths) == paths
