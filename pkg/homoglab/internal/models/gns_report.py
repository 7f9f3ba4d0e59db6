from typing import Any, Dict, Optional, Type, TypeVar

from attrs import define as _attrs_define
from attrs import field as _attrs_field

from ..types import finite_or_none

T = TypeVar("T", bound="GnsReport")


@_attrs_define
class GnsReport:
    """Both sides of the discrete Gagliardo-Nirenberg-Sobolev inequality.

    Attributes:
        p (float):
        p_star (float):
        ep_norm (float): ||M(|f - f_per|)||_{L^{p*}}.
        lp_of_delta (float): ||δf||_{L^p}.
        ratio (Optional[float]): ep_norm / lp_of_delta, None for the 0/0 case.
        degenerate (bool): True when both sides vanish.
        periodic_part (str): How f_per was obtained: "zero", "given" or "cesaro".
    """

    p: float
    p_star: float
    ep_norm: float
    lp_of_delta: float
    ratio: Optional[float]
    degenerate: bool = False
    periodic_part: str = "zero"
    additional_properties: Dict[str, Any] = _attrs_field(init=False, factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        field_dict: Dict[str, Any] = {}
        field_dict.update(self.additional_properties)
        field_dict.update(
            {
                "p": self.p,
                "p_star": self.p_star,
                "ep_norm": finite_or_none(self.ep_norm),
                "lp_of_delta": finite_or_none(self.lp_of_delta),
                "ratio": finite_or_none(self.ratio),
                "degenerate": self.degenerate,
                "periodic_part": self.periodic_part,
            }
        )

        return field_dict

    @classmethod
    def from_dict(cls: Type[T], src_dict: Dict[str, Any]) -> T:
        d = src_dict.copy()
        report = cls(
            p=d.pop("p"),
            p_star=d.pop("p_star"),
            ep_norm=d.pop("ep_norm"),
            lp_of_delta=d.pop("lp_of_delta"),
            ratio=d.pop("ratio"),
            degenerate=d.pop("degenerate", False),
            periodic_part=d.pop("periodic_part", "zero"),
        )

        report.additional_properties = d
        return report
