from typing import Any, Dict, Type, TypeVar

from attrs import define as _attrs_define
from attrs import field as _attrs_field

from ..types import finite_or_none

T = TypeVar("T", bound="SolveStats")


@_attrs_define
class SolveStats:
    """
    Attributes:
        iterations (int): Conjugate-gradient iterations performed.
        residual (float): Final relative residual ||b - Au|| / ||b||.
        projected (bool): Whether the iterate was projected onto zero-mean vectors.
        unknowns (int): Size of the linear system.
        tolerance (float): Requested relative tolerance.
    """

    iterations: int
    residual: float
    projected: bool
    unknowns: int
    tolerance: float
    additional_properties: Dict[str, Any] = _attrs_field(init=False, factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        field_dict: Dict[str, Any] = {}
        field_dict.update(self.additional_properties)
        field_dict.update(
            {
                "iterations": self.iterations,
                "residual": finite_or_none(self.residual),
                "projected": self.projected,
                "unknowns": self.unknowns,
                "tolerance": self.tolerance,
            }
        )

        return field_dict

    @classmethod
    def from_dict(cls: Type[T], src_dict: Dict[str, Any]) -> T:
        d = src_dict.copy()
        stats = cls(
            iterations=d.pop("iterations"),
            residual=d.pop("residual"),
            projected=d.pop("projected"),
            unknowns=d.pop("unknowns"),
            tolerance=d.pop("tolerance"),
        )

        stats.additional_properties = d
        return stats
