from typing import Any, Dict, List, Type, TypeVar, Union

from attrs import define as _attrs_define
from attrs import field as _attrs_field

from ..types import UNSET, Unset, finite_or_none

T = TypeVar("T", bound="NormReport")


@_attrs_define
class NormReport:
    """
    Attributes:
        p (float): Exponent of the discrete-gradient norm.
        lp_of_delta (float): ||δf||_{L^p} over the overlap domain of the shifted differences.
        l2_unif (float): Largest local L² norm over unit-cube windows.
        delta_cells (List[int]): Cell counts of the overlap domain used for ||δf||.
        window_cells (List[int]): Cell counts of the domain of admissible window corners used for M(|f|).
        p_star (Union[Unset, float]): Sobolev exponent pd/(d-p), only when 1 <= p < d.
        ep_norm (Union[Unset, float]): ||M(|f|)||_{L^{p*}}.
        ap_norm (Union[Unset, float]): ep_norm + lp_of_delta.
    """

    p: float
    lp_of_delta: float
    l2_unif: float
    delta_cells: List[int]
    window_cells: List[int]
    p_star: Union[Unset, float] = UNSET
    ep_norm: Union[Unset, float] = UNSET
    ap_norm: Union[Unset, float] = UNSET
    additional_properties: Dict[str, Any] = _attrs_field(init=False, factory=dict)

    @property
    def has_ep(self) -> bool:
        return not isinstance(self.p_star, Unset)

    def to_dict(self) -> Dict[str, Any]:
        field_dict: Dict[str, Any] = {}
        field_dict.update(self.additional_properties)
        field_dict.update(
            {
                "p": self.p,
                "lp_of_delta": finite_or_none(self.lp_of_delta),
                "l2_unif": finite_or_none(self.l2_unif),
                "delta_cells": list(self.delta_cells),
                "window_cells": list(self.window_cells),
            }
        )
        if self.p_star is not UNSET:
            field_dict["p_star"] = self.p_star
        if self.ep_norm is not UNSET:
            field_dict["ep_norm"] = finite_or_none(self.ep_norm)
        if self.ap_norm is not UNSET:
            field_dict["ap_norm"] = finite_or_none(self.ap_norm)

        return field_dict

    @classmethod
    def from_dict(cls: Type[T], src_dict: Dict[str, Any]) -> T:
        d = src_dict.copy()
        norm_report = cls(
            p=d.pop("p"),
            lp_of_delta=d.pop("lp_of_delta"),
            l2_unif=d.pop("l2_unif"),
            delta_cells=d.pop("delta_cells"),
            window_cells=d.pop("window_cells"),
            p_star=d.pop("p_star", UNSET),
            ep_norm=d.pop("ep_norm", UNSET),
            ap_norm=d.pop("ap_norm", UNSET),
        )

        norm_report.additional_properties = d
        return norm_report

    @property
    def additional_keys(self) -> List[str]:
        return list(self.additional_properties.keys())
