from typing import Any, Dict, List, Type, TypeVar, Union

from attrs import define as _attrs_define
from attrs import field as _attrs_field

from ..types import UNSET, Unset, finite_or_none

T = TypeVar("T", bound="SubsequenceReport")


@_attrs_define
class SubsequenceReport:
    """Distances of u^{ε_n} to the limit of one subsequence branch.

    Attributes:
        branch (str): Label of the branch that the distances refer to.
        n_list (List[int]): Subsequence indices.
        distances (List[float]): ||u^{ε_n} - u*_branch||_{L²} per n.
        limit_norm (float): ||u*_branch||_{L²}.
        cross_branch_distance (float): ||u*_branch - u*_other||_{L²}.
        phase (Union[Unset, float]): Phase y of the ε-family, for one-dimensional runs.
        deviations (Union[Unset, List[float]]): sup |a(x/ε_n) - a*_branch| over the domain.
        bounds (Union[Unset, List[float]]): Perturbation bound on the distance per n.
        limit_ratio_error (Union[Unset, float]): ||u*_2 - (2/3) u*_1||_{L²} / ||u*_2||_{L²}.
    """

    branch: str
    n_list: List[int]
    distances: List[float]
    limit_norm: float
    cross_branch_distance: float
    phase: Union[Unset, float] = UNSET
    deviations: Union[Unset, List[float]] = UNSET
    bounds: Union[Unset, List[float]] = UNSET
    limit_ratio_error: Union[Unset, float] = UNSET
    additional_properties: Dict[str, Any] = _attrs_field(init=False, factory=dict)

    def rows(self) -> List[Dict[str, Any]]:
        rows = []
        for i, n in enumerate(self.n_list):
            row = {"n": n, "distance": self.distances[i]}
            if self.deviations is not UNSET:
                row["deviation"] = self.deviations[i]
            if self.bounds is not UNSET:
                row["bound"] = self.bounds[i]
            rows.append(row)
        return rows

    def to_dict(self) -> Dict[str, Any]:
        field_dict: Dict[str, Any] = {}
        field_dict.update(self.additional_properties)
        field_dict.update(
            {
                "branch": self.branch,
                "n_list": list(self.n_list),
                "distances": [finite_or_none(v) for v in self.distances],
                "limit_norm": finite_or_none(self.limit_norm),
                "cross_branch_distance": finite_or_none(self.cross_branch_distance),
            }
        )
        if self.phase is not UNSET:
            field_dict["phase"] = self.phase
        if self.deviations is not UNSET:
            field_dict["deviations"] = [finite_or_none(v) for v in self.deviations]
        if self.bounds is not UNSET:
            field_dict["bounds"] = [finite_or_none(v) for v in self.bounds]
        if self.limit_ratio_error is not UNSET:
            field_dict["limit_ratio_error"] = finite_or_none(self.limit_ratio_error)

        return field_dict

    @classmethod
    def from_dict(cls: Type[T], src_dict: Dict[str, Any]) -> T:
        d = src_dict.copy()
        report = cls(
            branch=d.pop("branch"),
            n_list=d.pop("n_list"),
            distances=d.pop("distances"),
            limit_norm=d.pop("limit_norm"),
            cross_branch_distance=d.pop("cross_branch_distance"),
            phase=d.pop("phase", UNSET),
            deviations=d.pop("deviations", UNSET),
            bounds=d.pop("bounds", UNSET),
            limit_ratio_error=d.pop("limit_ratio_error", UNSET),
        )

        report.additional_properties = d
        return report
