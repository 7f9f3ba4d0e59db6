from typing import Any, Dict, List, Optional, Type, TypeVar, Union

from attrs import define as _attrs_define
from attrs import field as _attrs_field

from ..types import UNSET, Unset, finite_or_none

T = TypeVar("T", bound="DecompositionSummary")


@_attrs_define
class DecompositionSummary:
    """Serializable part of a periodic/perturbation split.

    Attributes:
        n_used (int): Cesàro radius of the returned periodic part.
        convergence_trace (List[List[float]]): Pairs (N, L¹(Q) distance between the means at N-1 and N).
        converged (bool): False when the trace does not settle, i.e. no periodic limit was detected.
        tail_exponent (Optional[float]): Decay exponent fitted to the second half of the trace.
        gns_ratio (Optional[float]): ||f - f_per||_{E^p} / ||δf||_{L^p}, when it could be computed.
        holder_f (Union[Unset, float]): Grid-level Hölder modulus of f.
        holder_periodic (Union[Unset, float]): Grid-level Hölder modulus of the periodic part.
        recovered_error (Union[Unset, float]): L¹(Q) distance to a known periodic part.
        tail_oracle (Union[Unset, float]): L¹(Q) norm of the Cesàro mean of a known perturbation.
    """

    n_used: int
    convergence_trace: List[List[float]]
    converged: bool
    tail_exponent: Optional[float] = None
    gns_ratio: Optional[float] = None
    holder_f: Union[Unset, float] = UNSET
    holder_periodic: Union[Unset, float] = UNSET
    recovered_error: Union[Unset, float] = UNSET
    tail_oracle: Union[Unset, float] = UNSET
    additional_properties: Dict[str, Any] = _attrs_field(init=False, factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        field_dict: Dict[str, Any] = {}
        field_dict.update(self.additional_properties)
        field_dict.update(
            {
                "n_used": self.n_used,
                "convergence_trace": [[int(n), finite_or_none(dist)] for n, dist in self.convergence_trace],
                "converged": self.converged,
                "tail_exponent": finite_or_none(self.tail_exponent),
                "gns_ratio": finite_or_none(self.gns_ratio),
            }
        )
        for key in ("holder_f", "holder_periodic", "recovered_error", "tail_oracle"):
            value = getattr(self, key)
            if value is not UNSET:
                field_dict[key] = finite_or_none(value)

        return field_dict

    @classmethod
    def from_dict(cls: Type[T], src_dict: Dict[str, Any]) -> T:
        d = src_dict.copy()
        summary = cls(
            n_used=d.pop("n_used"),
            convergence_trace=d.pop("convergence_trace"),
            converged=d.pop("converged"),
            tail_exponent=d.pop("tail_exponent", None),
            gns_ratio=d.pop("gns_ratio", None),
            holder_f=d.pop("holder_f", UNSET),
            holder_periodic=d.pop("holder_periodic", UNSET),
            recovered_error=d.pop("recovered_error", UNSET),
            tail_oracle=d.pop("tail_oracle", UNSET),
        )

        summary.additional_properties = d
        return summary
