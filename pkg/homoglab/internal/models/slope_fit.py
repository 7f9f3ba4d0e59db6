from typing import Any, Dict, Type, TypeVar, Union

from attrs import define as _attrs_define
from attrs import field as _attrs_field

from ..types import UNSET, Unset, finite_or_none, none_to_nan

T = TypeVar("T", bound="SlopeFit")


@_attrs_define
class SlopeFit:
    """
    Attributes:
        quantity (str): Name of the error measure that was fitted.
        slope (float): Fitted exponent of error ~ C eps^slope.
        intercept (float): ln C.
        stderr (float): Standard error of the slope.
        points (int): Number of ε values used.
        reference (Union[Unset, str]): Reference rate the slope is compared with ("mu" or "nu").
        reference_rate (Union[Unset, None, float]): Its value. None when the rate formula has no branch for p.
    """

    quantity: str
    slope: float
    intercept: float
    stderr: float
    points: int
    reference: Union[Unset, str] = UNSET
    reference_rate: Union[Unset, None, float] = UNSET
    additional_properties: Dict[str, Any] = _attrs_field(init=False, factory=dict)

    def confidence(self, width: float = 2.0):
        return self.slope - width * self.stderr, self.slope + width * self.stderr

    def to_dict(self) -> Dict[str, Any]:
        field_dict: Dict[str, Any] = {}
        field_dict.update(self.additional_properties)
        field_dict.update(
            {
                "quantity": self.quantity,
                "slope": finite_or_none(self.slope),
                "intercept": finite_or_none(self.intercept),
                "stderr": finite_or_none(self.stderr),
                "points": self.points,
            }
        )
        if self.reference is not UNSET:
            field_dict["reference"] = self.reference
        if self.reference_rate is not UNSET:
            field_dict["reference_rate"] = self.reference_rate

        return field_dict

    @classmethod
    def from_dict(cls: Type[T], src_dict: Dict[str, Any]) -> T:
        d = src_dict.copy()
        fit = cls(
            quantity=d.pop("quantity"),
            slope=none_to_nan(d.pop("slope")),
            intercept=none_to_nan(d.pop("intercept")),
            stderr=none_to_nan(d.pop("stderr")),
            points=d.pop("points"),
            reference=d.pop("reference", UNSET),
            reference_rate=d.pop("reference_rate", UNSET),
        )

        fit.additional_properties = d
        return fit
