"""Scenario configuration: JSON schema, defaults and conversion to parameters.

Concentration profiles are written the way they appear on a lab sheet:

    "9u(t)"               step of 9 from t = 0
    "12[u(t-1)-u(t-3)]"   rectangle of 12 on [1, 3)
    "0"                   nothing injected

and lengths carry a unit suffix ("500um", "1.2mm", "3e-4m").
"""
from __future__ import annotations

import copy
import json
import re
from dataclasses import dataclass

from .circuits import AndGateParams
from .errors import ConfigError
from .operators import BlockGeometry
from .oracle import FdConfig
from .qcsk import TABLE4, RxParams, TxParams
from .signals import Grid, PulseSpec, generate, rect, step, zeros
from .transfer import DispersionParams

SCENARIOS = ("and-gate", "qcsk-tx", "qcsk-rx", "link", "validate")
VALIDATE_TARGETS = ("cd-channel", "reaction")

_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_STEP = re.compile(rf"^\s*({_NUM})?\s*\*?\s*u\(\s*t\s*(?:-\s*({_NUM})\s*)?\)\s*$")
_RECT = re.compile(rf"^\s*({_NUM})?\s*\*?\s*\[\s*u\(\s*t\s*(?:-\s*({_NUM})\s*)?\)\s*-\s*"
                   rf"u\(\s*t\s*-\s*({_NUM})\s*\)\s*\]\s*$")
_LEN = re.compile(rf"^\s*({_NUM})\s*(um|µm|mm|m)\s*$")
_UNITS = {"um": 1e-6, "µm": 1e-6, "mm": 1e-3, "m": 1.0}


class ConfigKeyError(ConfigError):
    """Config error tied to a key, so the loader can point at its line."""

    def __init__(self, key: str, msg: str):
        super().__init__(f"{key}: {msg}")
        self.key = key


def parse_profile(text, key: str = "profile") -> PulseSpec:
    if isinstance(text, bool):
        raise ConfigKeyError(key, "expected a concentration profile")
    if isinstance(text, (int, float)):
        return step(float(text))
    if not isinstance(text, str):
        raise ConfigKeyError(key, "expected a concentration profile")
    s = text.strip()
    if re.fullmatch(_NUM, s):
        return step(float(s))
    m = _STEP.match(s)
    try:
        if m:
            return step(float(m.group(1) or 1.0), float(m.group(2) or 0.0))
        m = _RECT.match(s)
        if m:
            return rect(float(m.group(1) or 1.0), float(m.group(2) or 0.0), float(m.group(3)))
    except ConfigError as e:
        raise ConfigKeyError(key, str(e)) from None
    raise ConfigKeyError(key, f"cannot read concentration profile {text!r}")


def format_profile(spec: PulseSpec) -> str:
    num = lambda v: f"{v:g}"
    shift = lambda v: "t" if v == 0 else f"t-{num(v)}"
    if spec.kind == "step":
        return f"{num(spec.amplitude)}u({shift(spec.start)})"
    if spec.kind == "rectangle":
        return f"{num(spec.amplitude)}[u({shift(spec.start)})-u({shift(spec.stop)})]"
    raise ConfigError(f"cannot format a {spec.kind} profile")


def step_level(text, key: str) -> float:
    """Amplitude of a supply that must be a plain step from t = 0."""
    spec = parse_profile(text, key)
    if spec.kind != "step" or spec.start != 0:
        raise ConfigKeyError(key, "supplies must be steps starting at t = 0")
    return spec.amplitude


def parse_length(text, key: str = "length") -> float:
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        raise ConfigKeyError(key, "lengths need a unit, e.g. \"500um\"")
    m = _LEN.match(text) if isinstance(text, str) else None
    if not m:
        raise ConfigKeyError(key, f"cannot read length {text!r}")
    v = float(m.group(1)) * _UNITS[m.group(2)]
    if not v > 0:
        raise ConfigKeyError(key, "lengths must be positive")
    return v


def _number(d, key, positive=True) -> float:
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigKeyError(key, "expected a number")
    if positive and not v > 0:
        raise ConfigKeyError(key, "must be positive")
    return float(v)


def _bits(text, key="bits") -> tuple:
    if not (isinstance(text, str) and re.fullmatch(r"[01]{2}", text)):
        raise ConfigKeyError(key, "bits are written as two characters b2b1, e.g. \"10\"")
    return (int(text[0]), int(text[1]))


# defaults ----------------------------------------------------------------

_DISPERSION = {"D_eff": 1e-8, "v_eff": 1e-3, "theta": 0.125}
_BLOCKS = {"L_T": "80um", "L_C": "20um", "L_B": "50um", "L_R": "500um"}


def _and_defaults():
    return {"I1": "8[u(t-1)-u(t-3)]", "I2": "8[u(t-2)-u(t-4)]", "M": "8u(t)",
            "ThL": "10u(t)", "Amp": "12u(t)", **_BLOCKS, "L_A2": "120um", **_DISPERSION}


def _tx_defaults():
    return {"bits": "11", "I_high": "12[u(t-1)-u(t-3)]", "P1": "12[u(t-1)-u(t-3)]",
            "P2": "12[u(t-1)-u(t-3)]", "M": "12u(t)", "ThL": "16u(t)",
            "Amp1": "0", "Amp2": "8u(t)", "Amp3": "16u(t)", "Amp4": "24u(t)",
            "L_B1": "100um", "L_B2": "150um", "L_B3": "350um", "L_B4": "400um",
            **_BLOCKS, "L_A2": "120um", **_DISPERSION}


def _rx_defaults():
    return {"levels": [0, 1, 2, 3], "input": "[u(t-1)-u(t-3)]",
            "T1_1": "0.5u(t)", "T1_2": "1.5u(t)", "T1_3": "2.5u(t)",
            "A1": "9u(t)", "A2": "24u(t)", "A3": "20u(t)", "A4": "20u(t)", "A5": "51u(t)",
            "T2": "14u(t)", "T3": "7u(t)", "T4": "40u(t)", "NOT": "22u(t)", "V": "28u(t)",
            **{f"L{i}": f"{TABLE4[i]}um" for i in sorted(TABLE4)},
            "w": "20um", "h": "10um", "L_B": "50um", "decision_frac": 0.5,
            "flow_weighted_not": False, **_DISPERSION}


def _validate_defaults():
    return {"target": "cd-channel", "L": "500um", "input": "8[u(t-1)-u(t-3)]",
            "partner": "4[u(t-1.5)-u(t-2.5)]", "k": 400.0, "dx": "1um",
            "tolerance": 0.05, "D_eff": 1e-8, "v_eff": 1e-3}


def _link_defaults():
    tx = _tx_defaults()
    rx = _rx_defaults()
    bits = tx.pop("bits")
    rx.pop("levels")
    rx.pop("input")
    return {"bits": bits, "tx": tx, "rx": rx}


_DEFAULTS = {"and-gate": _and_defaults, "qcsk-tx": _tx_defaults, "qcsk-rx": _rx_defaults,
             "link": _link_defaults, "validate": _validate_defaults}
_HORIZON = {"and-gate": 20.0, "qcsk-tx": 20.0, "qcsk-rx": 20.0, "link": 20.0, "validate": 8.0}


@dataclass
class ScenarioConfig:
    scenario: str
    grid: dict
    params: dict
    out: str | None = None
    seed: int = 0

    def to_dict(self) -> dict:
        d = {"scenario": self.scenario, "grid": dict(self.grid), "params": copy.deepcopy(self.params),
             "seed": self.seed}
        if self.out is not None:
            d["out"] = self.out
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    def make_grid(self) -> Grid:
        g = self.grid
        for k in ("t0", "dt", "horizon"):
            if k not in g:
                raise ConfigKeyError(f"grid.{k}", "missing")
        dt, hz = _number(g, "dt"), _number(g, "horizon")
        t0 = _number(g, "t0", positive=False)
        if hz <= t0:
            raise ConfigKeyError("grid.horizon", "must exceed t0")
        return Grid.span(hz, dt, t0)


def list_scenarios() -> tuple:
    return SCENARIOS


def dump_defaults(scenario: str) -> ScenarioConfig:
    if scenario not in _DEFAULTS:
        raise ConfigError(f"unknown scenario {scenario!r}; choose from {', '.join(SCENARIOS)}")
    return ScenarioConfig(scenario, {"t0": 0.0, "dt": 0.005, "horizon": _HORIZON[scenario]},
                          _DEFAULTS[scenario]())


def _check_keys(d: dict, allowed: dict, where: str):
    if not isinstance(d, dict):
        raise ConfigKeyError(where or "params", "expected an object")
    for k in d:
        if k not in allowed:
            raise ConfigKeyError(k, f"unknown key in {where or 'config'}")


def from_dict(d: dict) -> ScenarioConfig:
    """Validate a parsed config; missing parameters fall back to defaults."""
    _check_keys(d, {"scenario": 1, "grid": 1, "params": 1, "out": 1, "seed": 1}, "")
    if "scenario" not in d:
        raise ConfigKeyError("scenario", "missing")
    base = dump_defaults(d["scenario"])
    grid = dict(base.grid)
    _check_keys(d.get("grid", {}), grid, "grid")
    grid.update(d.get("grid", {}))
    params = base.params
    given = d.get("params", {})
    _check_keys(given, params, "params")
    for k, v in given.items():
        if isinstance(params[k], dict):
            _check_keys(v, params[k], k)
            params[k].update(v)
        else:
            params[k] = v
    seed = d.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigKeyError("seed", "expected an integer")
    out = d.get("out")
    if out is not None and not isinstance(out, str):
        raise ConfigKeyError("out", "expected a path")
    cfg = ScenarioConfig(base.scenario, grid, params, out, seed)
    build(cfg)  # full validation
    return cfg


def loads(text: str) -> ScenarioConfig:
    """Parse JSON config text; errors name the offending line."""
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"line {e.lineno}: {e.msg}") from None
    if not isinstance(d, dict):
        raise ConfigError("line 1: config must be a JSON object")
    try:
        return from_dict(d)
    except ConfigKeyError as e:
        key = e.key.split(".")[-1]
        for i, line in enumerate(text.splitlines(), 1):
            if f'"{key}"' in line:
                raise ConfigError(f"line {i}: {e}") from None
        raise ConfigError(str(e)) from None


def load(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


# conversion to library parameters ---------------------------------------

def dispersion(d) -> DispersionParams:
    try:
        return DispersionParams.fixed(_number(d, "D_eff"), _number(d, "v_eff"))
    except KeyError:
        raise ConfigError("D_eff and v_eff are required") from None


def blocks(d) -> BlockGeometry:
    return BlockGeometry(**{k: parse_length(d[k], k) for k in ("L_T", "L_C", "L_B", "L_R")})


def _theta(d) -> float:
    th = d["theta"]
    if isinstance(th, bool) or not isinstance(th, (int, float)) or not 0 <= th < 1:
        raise ConfigKeyError("theta", "must lie in [0, 1)")
    return float(th)


def and_params(d: dict, grid: Grid, bits=(1, 1)) -> AndGateParams:
    i1 = generate(parse_profile(d["I1"], "I1"), grid, "I1") if bits[0] else zeros(grid, "I1")
    i2 = generate(parse_profile(d["I2"], "I2"), grid, "I2") if bits[1] else zeros(grid, "I2")
    return AndGateParams(i1, i2, M0=step_level(d["M"], "M"), ThL0=step_level(d["ThL"], "ThL"),
                         Amp0=step_level(d["Amp"], "Amp"), blocks=blocks(d),
                         L_A2=parse_length(d["L_A2"], "L_A2"), p=dispersion(d), theta=_theta(d))


def tx_params(d: dict, grid: Grid, bits=None) -> TxParams:
    hi = parse_profile(d["I_high"], "I_high")
    if hi.kind != "rectangle":
        raise ConfigKeyError("I_high", "the HIGH input must be a rectangle")
    bits = _bits(d["bits"]) if bits is None else tuple(bits)
    return TxParams(bits=bits, C0=hi.amplitude, P1=parse_profile(d["P1"], "P1"),
                    P2=parse_profile(d["P2"], "P2"), M0=step_level(d["M"], "M"),
                    ThL0=step_level(d["ThL"], "ThL"),
                    amps=tuple(step_level(d[f"Amp{i}"], f"Amp{i}") for i in (1, 2, 3, 4)),
                    buffers=tuple(parse_length(d[f"L_B{i}"], f"L_B{i}") for i in (1, 2, 3, 4)),
                    window=(hi.start, hi.stop), blocks=blocks(d),
                    L_A2=parse_length(d["L_A2"], "L_A2"), p=dispersion(d), theta=_theta(d),
                    grid=grid)


def rx_params(d: dict) -> RxParams:
    lv = lambda k: step_level(d[k], k)
    fw = d["flow_weighted_not"]
    if not isinstance(fw, bool):
        raise ConfigKeyError("flow_weighted_not", "expected true or false")
    lengths = {i: parse_length(d[f"L{i}"], f"L{i}") * 1e6 for i in TABLE4}
    return RxParams(T1=(lv("T1_1"), lv("T1_2"), lv("T1_3")), A1=lv("A1"), A2=lv("A2"),
                    A3=lv("A3"), A4=lv("A4"), A5=lv("A5"), T2=lv("T2"), T3=lv("T3"),
                    T4=lv("T4"), NOT0=lv("NOT"), V=lv("V"), lengths_um=lengths,
                    width=parse_length(d["w"], "w"), height=parse_length(d["h"], "h"),
                    L_B=parse_length(d["L_B"], "L_B"), p=dispersion(d), theta=_theta(d),
                    decision_frac=_number(d, "decision_frac"), flow_weighted_not=fw)


def rx_levels(d: dict) -> list:
    lv = d["levels"]
    if not (isinstance(lv, list) and lv and all(isinstance(i, int) and 0 <= i <= 3 for i in lv)):
        raise ConfigKeyError("levels", "expected a list of input levels in 0..3")
    return lv


def validate_settings(d: dict) -> dict:
    target = d["target"]
    if target not in VALIDATE_TARGETS:
        raise ConfigKeyError("target", f"choose from {', '.join(VALIDATE_TARGETS)}")
    k = _number(d, "k")
    tol = _number(d, "tolerance")
    return {"target": target, "L": parse_length(d["L"], "L"),
            "input": parse_profile(d["input"], "input"),
            "partner": parse_profile(d["partner"], "partner"), "k": k,
            "fd": FdConfig(dx=parse_length(d["dx"], "dx")), "tolerance": tol, "p": dispersion(d)}


def build(cfg: ScenarioConfig):
    """Convert a config into library objects (raises ConfigError when invalid)."""
    grid = cfg.make_grid()
    d = cfg.params
    if cfg.scenario == "and-gate":
        return grid, and_params(d, grid)
    if cfg.scenario == "qcsk-tx":
        return grid, tx_params(d, grid)
    if cfg.scenario == "qcsk-rx":
        parse_profile(d["input"], "input")
        return grid, (rx_params(d), rx_levels(d))
    if cfg.scenario == "link":
        tx = dict(d["tx"], bits=d["bits"])
        return grid, (tx_params(tx, grid), rx_params(d["rx"]))
    return grid, validate_settings(d)
