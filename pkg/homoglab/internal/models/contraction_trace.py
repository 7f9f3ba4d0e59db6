from typing import Any, Dict, List, Type, TypeVar, Union

from attrs import define as _attrs_define
from attrs import field as _attrs_field

from ..types import UNSET, Unset, finite_or_none

T = TypeVar("T", bound="ContractionTrace")


@_attrs_define
class ContractionTrace:
    """
    Attributes:
        iterations (int): Number of periodic-coefficient solves performed.
        increments (List[float]): ||∇u_{n+1} - ∇u_n||_{L²} per iteration.
        ratios (List[float]): Successive increment ratios.
        converged (bool):
        amplitude (Union[Unset, float]): sup |ã| of the perturbation driving the iteration.
        direct_distance (Union[Unset, float]): ||∇(u_fp - u_direct)||_{L²} relative to ||∇u_direct||_{L²}.
    """

    iterations: int
    increments: List[float]
    ratios: List[float]
    converged: bool
    amplitude: Union[Unset, float] = UNSET
    direct_distance: Union[Unset, float] = UNSET
    additional_properties: Dict[str, Any] = _attrs_field(init=False, factory=dict)

    @property
    def mean_ratio(self) -> float:
        if not self.ratios:
            return 0.0
        return float(sum(self.ratios) / len(self.ratios))

    def to_dict(self) -> Dict[str, Any]:
        field_dict: Dict[str, Any] = {}
        field_dict.update(self.additional_properties)
        field_dict.update(
            {
                "iterations": self.iterations,
                "increments": [finite_or_none(v) for v in self.increments],
                "ratios": [finite_or_none(v) for v in self.ratios],
                "converged": self.converged,
            }
        )
        if self.amplitude is not UNSET:
            field_dict["amplitude"] = self.amplitude
        if self.direct_distance is not UNSET:
            field_dict["direct_distance"] = finite_or_none(self.direct_distance)

        return field_dict

    @classmethod
    def from_dict(cls: Type[T], src_dict: Dict[str, Any]) -> T:
        d = src_dict.copy()
        trace = cls(
            iterations=d.pop("iterations"),
            increments=d.pop("increments"),
            ratios=d.pop("ratios"),
            converged=d.pop("converged"),
            amplitude=d.pop("amplitude", UNSET),
            direct_distance=d.pop("direct_distance", UNSET),
        )

        trace.additional_properties = d
        return trace
