"""Denoising methods and the name -> method registry.

Every registered entry has the signature ``fn(cube, params) -> HsiCube``
where ``params`` is a :class:`DenoiseParams`. Use :func:`denoise` to run a
method by name with parameters given as a dataclass, a dict or a JSON string.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from typing import Callable, Dict, Optional, Union

from ..cube import HsiCube
from ..errors import HydeError, MethodError, ParameterError
from .forpdn import LAMBDA_GRID, forpdn, forpdn_select_lambda
from .hyminor import HyminorResult, hyminor, l1_spectral_smooth
from .hyres import hyres
from .otvca import OtvcaResult, otvca, otvca_objective
from .subspace import SubspaceModel, estimate_noise, hysime, whitening
from .wsrrr import WsrrrResult, wsrrr, wsrrr_objective

__all__ = [
    "DenoiseParams",
    "METHODS",
    "denoise",
    "get_method",
    "register_method",
    "estimate_noise",
    "hysime",
    "whitening",
    "SubspaceModel",
    "hyres",
    "forpdn",
    "forpdn_select_lambda",
    "LAMBDA_GRID",
    "wsrrr",
    "wsrrr_objective",
    "WsrrrResult",
    "otvca",
    "otvca_objective",
    "OtvcaResult",
    "hyminor",
    "l1_spectral_smooth",
    "HyminorResult",
]


@dataclass(frozen=True)
class DenoiseParams:
    """Optional overrides for a denoiser; ``None`` means the method default.

    Attributes
    ----------
    rank : int, optional
        Subspace dimension (WSRRR, OTVCA). Defaults to the HySime estimate.
    lam : float, optional
        Regularization weight, JSON key ``"lambda"``. Must be positive.
    max_iters : int, optional
    tol : float, optional
    mu : float, optional
        Split Bregman penalty (HyMiNoR).
    wavelet : str, optional
    levels : int, optional

    HyRes is parameter-free and ignores ``rank``, ``lam``, ``max_iters``,
    ``tol`` and ``mu``.
    """

    rank: Optional[int] = None
    lam: Optional[float] = None
    max_iters: Optional[int] = None
    tol: Optional[float] = None
    mu: Optional[float] = None
    wavelet: Optional[str] = None
    levels: Optional[int] = None

    def __post_init__(self):
        if self.rank is not None and (isinstance(self.rank, bool) or int(self.rank) != self.rank or self.rank < 1):
            raise ParameterError(f"rank must be a positive integer, got {self.rank!r}")
        for name in ("lam", "tol", "mu"):
            val = getattr(self, name)
            if val is not None and not float(val) > 0:
                label = "lambda" if name == "lam" else name
                raise ParameterError(f"{label} must be > 0, got {val!r}")
        for name in ("max_iters", "levels"):
            val = getattr(self, name)
            if val is not None and (isinstance(val, bool) or int(val) != val or val < 1):
                raise ParameterError(f"{name} must be a positive integer, got {val!r}")

    @classmethod
    def from_dict(cls, d: Optional[dict]) -> "DenoiseParams":
        if d is None:
            return cls()
        if not isinstance(d, dict):
            raise ParameterError(f"params must be a JSON object, got {type(d).__name__}")
        d = dict(d)
        if "lambda" in d:
            if "lam" in d:
                raise ParameterError("give either 'lambda' or 'lam', not both")
            d["lam"] = d.pop("lambda")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ParameterError(f"unknown denoiser parameter(s): {', '.join(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "DenoiseParams":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ParameterError(f"params are not valid JSON: {exc}") from exc

    def to_dict(self) -> dict:
        """Non-default fields only, with ``lam`` written as ``"lambda"``."""
        out = {}
        for k, v in asdict(self).items():
            if v is not None:
                out["lambda" if k == "lam" else k] = v
        return out


def _kw(params: DenoiseParams, *names) -> dict:
    return {n: getattr(params, n) for n in names if getattr(params, n) is not None}


def _check_rank(cube: HsiCube, params: DenoiseParams):
    if params.rank is not None and params.rank > cube.bands:
        raise ParameterError(f"rank {params.rank} exceeds band count {cube.bands}")


def _identity(cube, params):
    return cube


def _hyres(cube, params):
    return hyres(cube, **_kw(params, "wavelet", "levels"))


def _forpdn(cube, params):
    return forpdn(cube, **_kw(params, "lam", "wavelet", "levels"))


def _wsrrr(cube, params):
    _check_rank(cube, params)
    return wsrrr(cube, **_kw(params, "rank", "lam", "max_iters", "tol", "wavelet", "levels")).denoised


def _otvca(cube, params):
    _check_rank(cube, params)
    kw = _kw(params, "rank", "lam", "max_iters", "tol")
    return otvca(cube, **kw).denoised


def _hyminor(cube, params):
    return hyminor(cube, **_kw(params, "lam", "mu", "max_iters", "tol"))


METHODS: Dict[str, Callable[[HsiCube, DenoiseParams], HsiCube]] = {
    "hyres": _hyres,
    "forpdn": _forpdn,
    "wsrrr": _wsrrr,
    "otvca": _otvca,
    "hyminor": _hyminor,
    "identity": _identity,
}


def register_method(name: str, fn: Callable[[HsiCube, DenoiseParams], HsiCube]) -> None:
    """Add or replace a registry entry."""
    if not name or not isinstance(name, str):
        raise ParameterError("method name must be a non-empty string")
    METHODS[name] = fn


def get_method(name: str):
    try:
        return METHODS[name]
    except KeyError:
        raise ParameterError(f"unknown method {name!r}; available: {', '.join(sorted(METHODS))}") from None


def coerce_params(params: Union[None, str, dict, DenoiseParams]) -> DenoiseParams:
    if params is None or isinstance(params, DenoiseParams):
        return params or DenoiseParams()
    if isinstance(params, str):
        return DenoiseParams.from_json(params)
    return DenoiseParams.from_dict(params)


def denoise(cube: HsiCube, method: str, params: Union[None, str, dict, DenoiseParams] = None) -> HsiCube:
    """Run the registered ``method`` on ``cube``.

    Library errors (bad parameters, shapes, data) propagate unchanged; any
    other exception raised inside the method is wrapped in
    :class:`MethodError`.
    """
    fn = get_method(method)
    p = coerce_params(params)
    try:
        out = fn(cube, p)
    except HydeError:
        raise
    except Exception as exc:  # numerical failures inside a method
        raise MethodError(f"{method} failed: {type(exc).__name__}: {exc}") from exc
    if not isinstance(out, HsiCube) or out.data.shape != cube.data.shape:
        raise MethodError(f"{method} returned an invalid result")
    return out
