"""
JSON codecs for curves, token files and masks.

Curve:  {"length": T, "values": [...], "raw": false}
Tokens: {"find": [[...]], "frames": [[...]], "labels": [[0|1,...]],
         "tau": 0.07, "lambda_p": 2.0, "omega": null | [[i, j], ...]}
Mask:   {"h": H, "w": W, "rows": ["0110", ...]}
"""

import json
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np
from pydantic import ValidationError as PydanticValidationError

from src.errors import ValidationError, wrap_pydantic_error
from src.tools.curve import RawScoreCurve, SimilarityCurve
from src.tools.matching import TokenMatrix
from src.tools.metrics import MaskFrame

PathLike = Union[str, Path]


def read_json(path: PathLike) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError as e:
        raise ValidationError(f"file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path} is not valid JSON: {e}") from e


def write_json(data: Any, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def _require(data: Dict[str, Any], key: str, what: str) -> Any:
    if not isinstance(data, dict) or key not in data:
        raise ValidationError(f"{what} JSON is missing {key!r}")
    return data[key]


def curve_from_dict(data: Dict[str, Any]) -> Union[RawScoreCurve, SimilarityCurve]:
    """Decode a curve; ``"raw": true`` marks unbounded pre-activation logits."""
    values = _require(data, "values", "curve")
    length = data.get("length", len(values))
    kind = RawScoreCurve if data.get("raw", False) else SimilarityCurve
    try:
        return kind(length=length, values=tuple(float(v) for v in values))
    except PydanticValidationError as e:
        raise wrap_pydantic_error(e, "curve") from e
    except (TypeError, ValueError) as e:
        raise ValidationError(f"invalid curve: {e}") from e


def curve_to_dict(curve: Union[RawScoreCurve, SimilarityCurve]) -> Dict[str, Any]:
    data: Dict[str, Any] = {"length": curve.length, "values": list(curve.values)}
    if not isinstance(curve, SimilarityCurve):
        data["raw"] = True
    return data


def load_curve(path: PathLike) -> Union[RawScoreCurve, SimilarityCurve]:
    return curve_from_dict(read_json(path))


def tokens_from_dict(data: Dict[str, Any]) -> TokenMatrix:
    """Decode a token file into a TokenMatrix."""
    find = _require(data, "find", "token")
    frames = _require(data, "frames", "token")
    labels = data.get("labels")
    if labels is None:
        labels = np.zeros((len(find), len(frames)))
    try:
        return TokenMatrix(
            find_tokens=find,
            frame_tokens=frames,
            labels=labels,
            valid_pairs=data.get("omega"),
            temperature=data.get("tau", 0.07),
            positive_weight=data.get("lambda_p", 2.0),
        )
    except PydanticValidationError as e:
        raise wrap_pydantic_error(e, "token file") from e
    except (TypeError, ValueError) as e:
        raise ValidationError(f"invalid token file: {e}") from e


def load_tokens(path: PathLike) -> TokenMatrix:
    return tokens_from_dict(read_json(path))


def encode_mask(mask: MaskFrame) -> Dict[str, Any]:
    rows = ["".join("1" if bit else "0" for bit in row) for row in mask.bits]
    return {"h": mask.height, "w": mask.width, "rows": rows}


def decode_mask(data: Dict[str, Any]) -> MaskFrame:
    """Decode text bit-rows into a MaskFrame, bit for bit."""
    height = _require(data, "h", "mask")
    width = _require(data, "w", "mask")
    rows = _require(data, "rows", "mask")
    if len(rows) != height or any(len(r) != width or set(r) - {"0", "1"} for r in rows):
        raise ValidationError(f"mask rows do not form a {height}x{width} bit grid")
    bits = np.array([[c == "1" for c in r] for r in rows], dtype=bool).reshape(height, width)
    try:
        return MaskFrame(height=height, width=width, bits=bits)
    except PydanticValidationError as e:
        raise wrap_pydantic_error(e, "mask") from e
