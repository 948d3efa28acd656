from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, model_validator

from core.errors import ChannelError
from modules.channels import Channel, make_bsc, make_w_eps, make_w_hat_eps
from modules.decoding import ErrorReport

Family = Literal["w_eps", "w_hat_eps", "bsc"]
Unit = Literal["nats", "bits"]

FAMILIES = {"w_eps": make_w_eps, "w_hat_eps": make_w_hat_eps, "bsc": make_bsc}


class ChannelSpec(BaseModel):
    family: Optional[Family] = None
    eps: Optional[float] = None
    matrix: Optional[List[List[float]]] = None
    inputs: str = "01"
    outputs: Optional[str] = None
    name: str = "custom"

    @model_validator(mode="after")
    def _one_source(self):
        if (self.family is None) == (self.matrix is None):
            raise ValueError("give either a channel family or a transition matrix")
        if self.family is not None and self.eps is None:
            raise ValueError(f"family {self.family} needs eps")
        if self.matrix is not None and self.outputs is None:
            raise ValueError("a transition matrix needs its output alphabet")
        return self

    def to_channel(self) -> Channel:
        if self.family is not None:
            return FAMILIES[self.family](self.eps)
        if len(self.matrix) != len(self.inputs):
            raise ChannelError(f"{len(self.matrix)} rows for {len(self.inputs)} input symbols")
        return Channel(self.matrix, tuple(self.inputs), tuple(self.outputs), self.name)


class RunConfig(BaseModel):
    subcommand: str
    unit: Unit = "nats"
    seed: Optional[int] = None
    output_path: Optional[Path] = None
    flags: Dict[str, Any] = {}


class ExponentsReport(BaseModel):
    channel: str
    unit: Unit
    rate: float
    expurgated: float
    rate_zero_expurgated: float
    converse: Optional[float] = None
    rate_zero_random_coding: Optional[float] = None


class ThresholdReport(BaseModel):
    eps: float
    unit: Unit
    critical_epsilon: float
    rate_threshold: float
    converse: float
    rate_zero_expurgated: float


class FiguresReport(BaseModel):
    which: Literal["fig1", "fig2"]
    unit: Unit
    files: List[str]
    crossing: Optional[float] = None


class CounterexampleMessage(BaseModel):
    message: int
    codeword: str
    partner: int
    y_kappa: str
    y_tilde: str
    modified_index: int
    mi_message: float
    mi_partner: float
    y_tilde_prob: float
    error_prob: Optional[float] = None


class CounterexampleReport(BaseModel):
    eps: float
    n: int
    M: int
    rate: float
    unit: Unit
    separation_applies: bool
    extracted_subcode: bool
    probability_bound: float
    exponent_ceiling: float
    expurgated_at_rate: float
    gap_to_expurgated: float
    converse: float
    rate_zero_separation: float
    messages: List[CounterexampleMessage]


class SimulationReport(BaseModel):
    channel: str
    decoder: str
    tie_policy: str
    M: int
    n: int
    rate: float
    report: ErrorReport
    empirical_exponent_average: Optional[float] = None
    empirical_exponent_maximal: Optional[float] = None


class AppendixReport(BaseModel):
    eps: float
    grid_density: int
    bruteforce: float
    bruteforce_alpha: Tuple[float, float, float, float]
    closed_form: float
    rate_zero_expurgated: float
    gaps: Dict[str, float]
    optimal_gammas: Tuple[float, float]


Report = Union[
    ExponentsReport, ThresholdReport, FiguresReport, CounterexampleReport, SimulationReport, AppendixReport
]
