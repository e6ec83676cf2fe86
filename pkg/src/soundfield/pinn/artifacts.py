# -*- coding: utf-8 -*-
"""Artifact files

CSV tables and the network checkpoint exchanged between CLI commands. Every
table starts with a fixed header line, values are written with 17 significant
digits so that reading a file back reproduces the written floats exactly.
"""
from pathlib import Path
from typing import (
    Any,
    Dict,
    List,
    Sequence,
    Union,
)

import numpy as np

from ruamel.yaml import YAML
from ruamel.yaml.error import YAMLError

from .errors import ArtifactParseError
from .evaluation import (
    FieldSlice,
    SweepTable,
)
from .field import Measurements
from .model import MlpArch
from .nn import MlpParams
from .pw_estimator import PwModel
from .sh_estimator import ShCoefficients
from .train import LossReport


__all__ = [
    "MEASUREMENTS_HEADER",
    "POINTS_HEADER",
    "SH_HEADER",
    "PW_HEADER",
    "LOSS_HEADER",
    "SWEEP_HEADER",
    "SLICE_HEADER",
    "write_table",
    "read_table",
    "write_measurements",
    "read_measurements",
    "write_points",
    "read_points",
    "write_field",
    "write_sh_coefficients",
    "write_pw_amplitudes",
    "write_loss_log",
    "read_loss_log",
    "write_sweep",
    "write_slice",
    "write_checkpoint",
    "read_checkpoint",
    "write_run_record",
    "read_run_scale",
]

MEASUREMENTS_HEADER = ("x", "y", "z", "re", "im")
POINTS_HEADER = ("x", "y", "z")
SH_HEADER = ("n", "m", "re", "im")
PW_HEADER = ("dx", "dy", "dz", "re", "im")
LOSS_HEADER = ("epoch", "l_data", "l_pde", "l_bc", "total")
SWEEP_HEADER = ("radius", "nmse_sh", "nmse_pl", "nmse_pinn")
SLICE_HEADER = ("theta", "phi", "re", "im", "err")

FLOAT_FORMAT = "%.17g"
INT_FORMAT = "%d"

PathLike = Union[str, Path]


def write_table(
    path: PathLike,
    header: Sequence[str],
    columns: Sequence[np.ndarray],
    integer_columns: Sequence[int] = (),
) -> Path:
    """Writes equally long columns as a CSV file with the given header line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    if data.size == 0:
        data = data.reshape(0, len(header))
    formats = [
        INT_FORMAT if i in integer_columns else FLOAT_FORMAT for i in range(len(header))
    ]
    np.savetxt(
        path,
        data,
        fmt=formats,
        delimiter=",",
        header=",".join(header),
        comments="",
    )
    return path


def read_table(path: PathLike, header: Sequence[str]) -> np.ndarray:
    """Reads a CSV file written by [`write_table`][soundfield.pinn.artifacts.write_table].

    Raises:
        ArtifactParseError: Naming the line and column of the first bad value
        FileNotFoundError: If the file does not exist

    Returns:
        `(rows, len(header))` float array
    """
    path = Path(path)
    lines = path.read_text().splitlines()
    expected = ",".join(header)
    if not lines or lines[0].strip() != expected:
        raise ArtifactParseError(path, f"expected header '{expected}'", line=1)

    rows: List[List[float]] = []
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != len(header):
            raise ArtifactParseError(
                path,
                f"expected {len(header)} values, found {len(fields)}",
                line=line_no,
            )
        row = []
        for column, value in enumerate(fields, start=1):
            try:
                number = float(value)
            except ValueError:
                raise ArtifactParseError(
                    path, f"'{value.strip()}' is not a number", line_no, column
                )
            if not np.isfinite(number):
                raise ArtifactParseError(
                    path, f"'{value.strip()}' is not finite", line_no, column
                )
            row.append(number)
        rows.append(row)
    return np.array(rows, dtype=float).reshape(-1, len(header))


def write_measurements(path: PathLike, m: Measurements) -> Path:
    return write_field(path, m.positions, m.pressures)


def read_measurements(path: PathLike) -> Measurements:
    table = read_table(path, MEASUREMENTS_HEADER)
    return Measurements(
        positions=table[:, :3], pressures=table[:, 3] + 1j * table[:, 4]
    )


def write_points(path: PathLike, points: np.ndarray) -> Path:
    cart = np.asarray(points, dtype=float).reshape(-1, 3)
    return write_table(path, POINTS_HEADER, cart.T)


def read_points(path: PathLike) -> np.ndarray:
    return read_table(path, POINTS_HEADER)


def write_field(path: PathLike, points: np.ndarray, values: np.ndarray) -> Path:
    """Complex pressures at Cartesian points, in the measurements format."""
    cart = np.asarray(points, dtype=float).reshape(-1, 3)
    values = np.asarray(values, dtype=complex).reshape(-1)
    return write_table(
        path, MEASUREMENTS_HEADER, [*cart.T, values.real, values.imag]
    )


def write_sh_coefficients(path: PathLike, c: ShCoefficients) -> Path:
    modes = np.array(c.modes(), dtype=float).reshape(-1, 2)
    return write_table(
        path,
        SH_HEADER,
        [modes[:, 0], modes[:, 1], c.coeffs.real, c.coeffs.imag],
        integer_columns=(0, 1),
    )


def write_pw_amplitudes(path: PathLike, model: PwModel) -> Path:
    return write_table(
        path,
        PW_HEADER,
        [*model.directions.T, model.amplitudes.real, model.amplitudes.imag],
    )


def write_loss_log(path: PathLike, reports: Sequence[LossReport]) -> Path:
    columns = np.array(
        [[r.epoch, r.l_data, r.l_pde, r.l_bc, r.weighted_total] for r in reports],
        dtype=float,
    ).reshape(-1, len(LOSS_HEADER))
    return write_table(path, LOSS_HEADER, columns.T, integer_columns=(0,))


def read_loss_log(path: PathLike) -> List[LossReport]:
    table = read_table(path, LOSS_HEADER)
    return [
        LossReport(int(row[0]), row[1], row[2], row[3], weighted_total=row[4])
        for row in table
    ]


def write_sweep(path: PathLike, table: SweepTable) -> Path:
    """Sweep CSV with one NMSE column per estimator in `sh, pl, pinn` order."""
    names = [column.split("_", 1)[1] for column in SWEEP_HEADER[1:]]
    missing = [name for name in names if name not in table.columns]
    if missing:
        raise KeyError(f"sweep table lacks columns {missing}")
    return write_table(
        path, SWEEP_HEADER, [table.radii] + [table.columns[name] for name in names]
    )


def write_slice(path: PathLike, grid: FieldSlice) -> Path:
    return write_table(
        path,
        SLICE_HEADER,
        [grid.theta, grid.phi, grid.values.real, grid.values.imag, grid.error],
    )


def write_checkpoint(path: PathLike, params: MlpParams) -> Path:
    """Architecture header line followed by one flat parameter per line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(
        path,
        params.flatten(),
        fmt=FLOAT_FORMAT,
        header=params.arch.describe(),
        comments="",
    )
    return path


def _parse_arch(path: Path, header: str) -> MlpArch:
    tokens = header.split()
    if not tokens or tokens[0] != "mlp":
        raise ArtifactParseError(path, "missing 'mlp' architecture header", line=1)
    fields: Dict[str, str] = {}
    for token in tokens[1:]:
        key, sep, value = token.partition("=")
        if not sep:
            raise ArtifactParseError(path, f"malformed header entry '{token}'", line=1)
        fields[key] = value
    if fields.pop("activation", "tanh") != "tanh":
        raise ArtifactParseError(path, "only tanh networks are supported", line=1)
    # headers without a scale come from unscaled networks
    scale = fields.pop("input_scale", "1.0")
    try:
        values: Dict[str, Any] = {key: int(value) for key, value in fields.items()}
        return MlpArch(input_scale=float(scale), **values)
    except ValueError as error:
        raise ArtifactParseError(path, f"invalid architecture: {error}", line=1)


def read_checkpoint(path: PathLike) -> MlpParams:
    """Reads a checkpoint written by [`write_checkpoint`][soundfield.pinn.artifacts.write_checkpoint].

    Raises:
        ArtifactParseError: For a bad header, a bad value or a wrong parameter count
    """
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines:
        raise ArtifactParseError(path, "empty checkpoint", line=1)
    arch = _parse_arch(path, lines[0])

    values = []
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise ArtifactParseError(path, f"'{line.strip()}' is not a number", line_no, 1)
    if len(values) != arch.parameter_count:
        raise ArtifactParseError(
            path,
            f"architecture needs {arch.parameter_count} parameters, found {len(values)}",
        )
    return MlpParams.from_flat(arch, values)


def write_run_record(path: PathLike, record: Dict[str, Any]) -> Path:
    """Stores scalar facts about a run (seed, scale, k, ...) as YAML."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    yaml = YAML(typ="safe")
    yaml.default_flow_style = False
    yaml.dump(dict(record), path)
    return path


def read_run_scale(path: PathLike) -> float:
    """The normalization scale stored by [`write_run_record`][soundfield.pinn.artifacts.write_run_record].

    Raises:
        ArtifactParseError: If the record is not valid YAML or lacks a positive scale
    """
    path = Path(path)
    try:
        record = YAML(typ="safe").load(path)
    except YAMLError as error:
        raise ArtifactParseError(path, f"invalid YAML: {error}")
    if not isinstance(record, dict) or "scale" not in record:
        raise ArtifactParseError(path, "missing 'scale' entry")
    try:
        scale = float(record["scale"])
    except (TypeError, ValueError):
        raise ArtifactParseError(path, f"invalid scale {record['scale']!r}")
    if not (np.isfinite(scale) and scale > 0):
        raise ArtifactParseError(path, f"scale must be positive, got {scale}")
    return scale
