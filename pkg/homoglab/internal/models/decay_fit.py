from typing import Any, Dict, List, Optional, Type, TypeVar, Union

from attrs import define as _attrs_define
from attrs import field as _attrs_field

from ..types import UNSET, Unset, finite_or_none

T = TypeVar("T", bound="DecayFit")


@_attrs_define
class DecayFit:
    """Least-squares fit of ln(value) against ln(radius).

    Attributes:
        radii (List[float]): Strictly increasing radii.
        averaged_values (List[float]): Nonnegative values measured at each radius.
        fitted_exponent (Optional[float]): Slope of the log-log fit. None when the fit is degenerate.
        intercept (Optional[float]): Intercept of the log-log fit.
        r2 (Optional[float]): Coefficient of determination of the fit.
        degenerate (bool): True when some value is zero, so no logarithmic fit exists.
        reference_exponent (Union[Unset, float]): Expected exponent, when one is known.
    """

    radii: List[float]
    averaged_values: List[float]
    fitted_exponent: Optional[float]
    intercept: Optional[float]
    r2: Optional[float]
    degenerate: bool = False
    reference_exponent: Union[Unset, float] = UNSET
    additional_properties: Dict[str, Any] = _attrs_field(init=False, factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        field_dict: Dict[str, Any] = {}
        field_dict.update(self.additional_properties)
        field_dict.update(
            {
                "radii": [float(r) for r in self.radii],
                "averaged_values": [finite_or_none(v) for v in self.averaged_values],
                "fitted_exponent": finite_or_none(self.fitted_exponent),
                "intercept": finite_or_none(self.intercept),
                "r2": finite_or_none(self.r2),
                "degenerate": self.degenerate,
            }
        )
        if self.reference_exponent is not UNSET:
            field_dict["reference_exponent"] = self.reference_exponent

        return field_dict

    @classmethod
    def from_dict(cls: Type[T], src_dict: Dict[str, Any]) -> T:
        d = src_dict.copy()
        decay_fit = cls(
            radii=d.pop("radii"),
            averaged_values=d.pop("averaged_values"),
            fitted_exponent=d.pop("fitted_exponent"),
            intercept=d.pop("intercept", None),
            r2=d.pop("r2", None),
            degenerate=d.pop("degenerate", False),
            reference_exponent=d.pop("reference_exponent", UNSET),
        )

        decay_fit.additional_properties = d
        return decay_fit
