from typing import Any, Dict, List, Optional, Type, TypeVar, Union

from attrs import define as _attrs_define
from attrs import field as _attrs_field

from ..types import UNSET, Unset, finite_or_none
from .slope_fit import SlopeFit

T = TypeVar("T", bound="SweepReport")


@_attrs_define
class SweepReport:
    """Errors of an ε-sweep and the fitted convergence rates.

    Attributes:
        eps_list (List[float]): Strictly decreasing ε values.
        l2_error (List[float]): ||u^ε - u*||_{L²(Ω)} per ε.
        grad_remainder_l2 (List[float]): ||∇R^ε||_{L²(Ω₁)} per ε.
        slopes (List[SlopeFit]): One fit per error measure.
        p (float): Integrability exponent of the perturbation.
        mu (Optional[float]): Reference rate from the A^p theory, None when p is outside both branches.
        nu (Optional[float]): Reference rate from the Lebesgue embedding.
        q (Optional[float]): Lebesgue exponent used for nu.
        reference (str): "nu" when the L^r gradient remainder was fitted, else "mu".
        branches (Dict[str, Optional[str]]): Branch of each rate formula, e.g. {"mu": "d/p*", "nu": "d/q"}.
        grad_remainder_lr (Union[Unset, List[float]]): ||∇R^ε||_{L^r(Ω₁)} per ε.
        r (Union[Unset, float]):
    """

    eps_list: List[float]
    l2_error: List[float]
    grad_remainder_l2: List[float]
    slopes: List[SlopeFit]
    p: float
    mu: Optional[float]
    nu: Optional[float]
    q: Optional[float]
    reference: str
    grad_remainder_lr: Union[Unset, List[float]] = UNSET
    r: Union[Unset, float] = UNSET
    branches: Dict[str, Optional[str]] = _attrs_field(factory=dict)
    additional_properties: Dict[str, Any] = _attrs_field(init=False, factory=dict)

    @property
    def mu_exceeds_nu(self) -> Optional[bool]:
        if self.mu is None or self.nu is None:
            return None
        return self.mu >= self.nu

    def slope(self, quantity: str) -> SlopeFit:
        for fit in self.slopes:
            if fit.quantity == quantity:
                return fit
        raise KeyError(quantity)

    def rows(self) -> List[Dict[str, Any]]:
        rows = []
        for i, eps in enumerate(self.eps_list):
            row = {"eps": eps, "l2_error": self.l2_error[i], "grad_remainder_l2": self.grad_remainder_l2[i]}
            if self.grad_remainder_lr is not UNSET:
                row["grad_remainder_lr"] = self.grad_remainder_lr[i]
            rows.append(row)
        return rows

    def to_dict(self) -> Dict[str, Any]:
        field_dict: Dict[str, Any] = {}
        field_dict.update(self.additional_properties)
        field_dict.update(
            {
                "eps_list": [float(e) for e in self.eps_list],
                "l2_error": [finite_or_none(v) for v in self.l2_error],
                "grad_remainder_l2": [finite_or_none(v) for v in self.grad_remainder_l2],
                "slopes": [fit.to_dict() for fit in self.slopes],
                "p": self.p,
                "mu": self.mu,
                "nu": self.nu,
                "q": finite_or_none(self.q),
                "reference": self.reference,
                "mu_exceeds_nu": self.mu_exceeds_nu,
                "branches": dict(self.branches),
            }
        )
        if self.grad_remainder_lr is not UNSET:
            field_dict["grad_remainder_lr"] = [finite_or_none(v) for v in self.grad_remainder_lr]
        if self.r is not UNSET:
            field_dict["r"] = self.r

        return field_dict

    @classmethod
    def from_dict(cls: Type[T], src_dict: Dict[str, Any]) -> T:
        d = src_dict.copy()
        d.pop("mu_exceeds_nu", None)
        slopes = [SlopeFit.from_dict(item) for item in d.pop("slopes", [])]
        report = cls(
            eps_list=d.pop("eps_list"),
            l2_error=d.pop("l2_error"),
            grad_remainder_l2=d.pop("grad_remainder_l2"),
            slopes=slopes,
            p=d.pop("p"),
            mu=d.pop("mu"),
            nu=d.pop("nu"),
            q=d.pop("q"),
            reference=d.pop("reference"),
            grad_remainder_lr=d.pop("grad_remainder_lr", UNSET),
            r=d.pop("r", UNSET),
            branches=d.pop("branches", {}),
        )

        report.additional_properties = d
        return report
