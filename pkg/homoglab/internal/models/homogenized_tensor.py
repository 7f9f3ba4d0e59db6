from typing import Any, Dict, List, Type, TypeVar

from attrs import define as _attrs_define
from attrs import field as _attrs_field

from .solve_stats import SolveStats

T = TypeVar("T", bound="HomogenizedTensor")


@_attrs_define
class HomogenizedTensor:
    """
    Attributes:
        matrix (List[List[float]]): Symmetrized effective tensor a*.
        asymmetry (float): Largest |a*_ij - a*_ji| before symmetrization.
        cells_per_unit (int): Resolution of the periodic cell.
        averaging (str): Interface averaging used by the cell operator.
        solver_stats (List[SolveStats]): One entry per corrector direction.
    """

    matrix: List[List[float]]
    asymmetry: float
    cells_per_unit: int
    averaging: str
    solver_stats: List[SolveStats]
    additional_properties: Dict[str, Any] = _attrs_field(init=False, factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        field_dict: Dict[str, Any] = {}
        field_dict.update(self.additional_properties)
        field_dict.update(
            {
                "matrix": [[float(v) for v in row] for row in self.matrix],
                "asymmetry": float(self.asymmetry),
                "cells_per_unit": self.cells_per_unit,
                "averaging": self.averaging,
                "solver_stats": [stats.to_dict() for stats in self.solver_stats],
            }
        )

        return field_dict

    @classmethod
    def from_dict(cls: Type[T], src_dict: Dict[str, Any]) -> T:
        d = src_dict.copy()
        solver_stats = [SolveStats.from_dict(item) for item in d.pop("solver_stats", [])]
        tensor = cls(
            matrix=d.pop("matrix"),
            asymmetry=d.pop("asymmetry"),
            cells_per_unit=d.pop("cells_per_unit"),
            averaging=d.pop("averaging"),
            solver_stats=solver_stats,
        )

        tensor.additional_properties = d
        return tensor
