"""Readers and writers for channel specs, codebooks and two-column .dat curve files."""

import json
from pathlib import Path
from typing import Union

import numpy as np
from pydantic import ValidationError

from core.errors import ChannelError, CodebookError, ExexError, InputError
from modules.decoding import Codebook
from modules.exponents import ExponentCurve
from modules.probkit import BINARY, Alphabet

from .schemas import ChannelSpec

PathLike = Union[str, Path]


def load_channel_spec(path: PathLike) -> ChannelSpec:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as e:
        raise ChannelError(f"cannot read channel spec {path}: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise ChannelError(f"channel spec {path} is not valid JSON: {e.msg}") from e
    try:
        return ChannelSpec.model_validate(raw)
    except ValidationError as e:
        raise ChannelError(f"malformed channel spec {path}: {e.errors()[0]['msg']}") from e


def read_codebook(path: PathLike, alphabet: Alphabet = BINARY) -> Codebook:
    try:
        with open(path) as f:
            return Codebook.from_lines(f, alphabet)
    except OSError as e:
        raise CodebookError(f"cannot read codebook {path}: {e.strerror}") from e


def write_dat(path: PathLike, curve: ExponentCurve) -> Path:
    """Two whitespace-separated columns under '#' header lines naming the curve, axis kind and unit."""
    path = Path(path)
    header = "\n".join(
        [
            f"label: {curve.label}",
            f"abscissa: {curve.abscissa_kind}",
            f"unit: {curve.unit}",
        ]
    )
    data = np.array(curve.samples, dtype=float).reshape(-1, 2)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savetxt(path, data, fmt="%.17g", header=header, comments="# ")
    except OSError as e:
        raise ExexError(f"cannot write {path}: {e.strerror}") from e
    return path


def read_dat(path: PathLike) -> ExponentCurve:
    path = Path(path)
    meta = {}
    try:
        with open(path) as f:
            for line in f:
                if not line.startswith("#"):
                    continue
                key, _, value = line.lstrip("#").partition(":")
                meta[key.strip()] = value.strip()
        data = np.loadtxt(path, comments="#", ndmin=2)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from e
    except ValueError as e:
        raise InputError(f"{path} is not a two-column numeric file: {e}") from e
    if data.size and data.shape[1] != 2:
        raise InputError(f"{path} has {data.shape[1]} columns, expected 2")
    try:
        return ExponentCurve(
            samples=[(float(x), float(v)) for x, v in data],
            abscissa_kind=meta.get("abscissa", "rate"),
            unit=meta.get("unit", "nats"),
            label=meta.get("label", path.stem),
        )
    except ValidationError as e:
        raise InputError(f"{path} does not hold a valid curve: {e.errors()[0]['msg']}") from e
