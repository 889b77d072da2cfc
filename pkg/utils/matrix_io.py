"""
Matrix Interchange Module
Parses and serializes the JSON documents the command line reads and writes:
matrices, constructed families, residues and vectors.
"""

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple, Union

from utils.errors import DimensionMismatchError, NonSquareError, ParseError
from utils.exact_core import IntMatrix, Vector
from utils.family_builder import ConstructedMatrix, validate_permutation
from utils.lattice_fpd import Residue

logger = logging.getLogger(__name__)

# Readers that decode JSON numbers as doubles lose precision past 2^53.
SAFE_INTEGER_BITS = 53
_INTEGER_TEXT = re.compile(r"^[+-]?\d+$")


def encode_int(value: int) -> Union[int, str]:
    """Emit value as a JSON number, or as a decimal string beyond 53 bits."""
    value = int(value)
    return str(value) if abs(value) >= 1 << SAFE_INTEGER_BITS else value


def decode_int(value: Any, where: str = "value") -> int:
    """Accept a JSON integer or a decimal string; reject floats and booleans."""
    if isinstance(value, bool):
        raise ParseError(f"Expected an integer for {where}, got a boolean")
    if isinstance(value, int):
        return value
    if isinstance(value, str) and _INTEGER_TEXT.match(value.strip()):
        return int(value.strip())
    if isinstance(value, float) and value.is_integer() and abs(value) < 1 << SAFE_INTEGER_BITS:
        return int(value)
    raise ParseError(f"Expected an integer for {where}, got {value!r}")


def parse_vector_text(text: str) -> Vector:
    """Inline vectors such as '5,7' or '[5, 7]'."""
    cleaned = text.strip().strip("[]()")
    if not cleaned:
        raise ParseError("Empty vector")
    return tuple(decode_int(part, "vector component") for part in cleaned.split(","))


@dataclass(frozen=True)
class FamilyDocument:
    """A constructed family as stored on disk."""

    dim: int
    qs: Tuple[int, ...]
    kind: str
    members: Tuple[ConstructedMatrix, ...]


class DocumentParser:
    """
    Decoder for the toolkit's JSON interchange documents.
    Each kind maps a decoded document to its domain object.
    """

    DOCUMENT_KINDS = ["matrix", "family", "residue", "vector"]
    ENCODINGS = ["utf-8", "utf-8-sig", "latin-1"]

    def parse(self, data: Union[bytes, str], kind: str = "matrix") -> Any:
        """
        Parse a document of the given kind.

        Args:
            data: Raw file contents
            kind: One of DOCUMENT_KINDS

        Returns:
            IntMatrix, FamilyDocument, Residue or Vector
        """
        if kind not in self.DOCUMENT_KINDS:
            raise ValueError(f"Unsupported document kind: {kind}")

        document = self._load_json(self._decode(data))
        if kind == "matrix":
            return self.parse_matrix(document)
        if kind == "family":
            return self.parse_family(document)
        if kind == "residue":
            return self.parse_residue(document)
        return self.parse_vector(document)

    def _decode(self, data: Union[bytes, str]) -> str:
        if isinstance(data, str):
            return data
        for encoding in self.ENCODINGS:
            try:
                return data.decode(encoding)
            except UnicodeDecodeError:
                continue
        raise ParseError("Could not decode document")

    def _load_json(self, text: str) -> Any:
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            logger.debug(f"JSON error: {e}")
            raise ParseError(f"Malformed JSON: {e.msg}", line=e.lineno, column=e.colno) from e

    def parse_matrix(self, document: Any) -> IntMatrix:
        """{"dim": D, "rows": [[...], ...]} with D rows of D integers."""
        if not isinstance(document, dict) or "rows" not in document:
            raise ParseError("Matrix document needs a 'rows' list")
        rows = document["rows"]
        if not isinstance(rows, list) or not rows or not all(isinstance(row, list) for row in rows):
            raise ParseError("'rows' must be a nonempty list of lists")

        widths = {len(row) for row in rows}
        if len(widths) != 1:
            raise DimensionMismatchError(f"Ragged matrix rows of lengths {sorted(widths)}")
        dim = decode_int(document.get("dim", len(rows)), "dim")
        if len(rows) != dim or widths != {dim}:
            raise DimensionMismatchError(f"Declared dim {dim} does not match a {len(rows)}x{widths.pop()} body")

        return IntMatrix.from_rows(
            [[decode_int(v, f"rows[{i}][{j}]") for j, v in enumerate(row)] for i, row in enumerate(rows)]
        )

    def parse_vector(self, document: Any) -> Vector:
        if isinstance(document, dict):
            document = document.get("vector", document.get("r"))
        if not isinstance(document, list) or not document:
            raise ParseError("Vector document must be a nonempty list")
        return tuple(decode_int(v, f"vector[{k}]") for k, v in enumerate(document))

    def parse_residue(self, document: Any) -> Residue:
        """{"r": [...], "modulus": {matrix document}}."""
        if not isinstance(document, dict) or "r" not in document or "modulus" not in document:
            raise ParseError("Residue document needs 'r' and 'modulus'")
        modulus = self.parse_matrix(document["modulus"])
        return Residue(self.parse_vector(document["r"]), modulus)

    def parse_family(self, document: Any) -> FamilyDocument:
        if not isinstance(document, dict) or not isinstance(document.get("members"), list):
            raise ParseError("Family document needs a 'members' list")
        dim = decode_int(document.get("dim"), "dim")
        members = []
        for index, entry in enumerate(document["members"]):
            if not isinstance(entry, dict) or "matrix" not in entry:
                raise ParseError(f"members[{index}] needs a 'matrix'")
            matrix = self.parse_matrix(entry["matrix"])
            if matrix.rows != dim:
                raise DimensionMismatchError(f"members[{index}] is {matrix.rows}-D in a {dim}-D family")
            perm = tuple(decode_int(p, "perm") for p in entry.get("perm") or [])
            if perm:
                validate_permutation(perm, dim)
            mask = entry.get("sign_mask")
            members.append(
                ConstructedMatrix(
                    matrix=matrix,
                    q=decode_int(entry.get("q"), "q"),
                    perm=perm,
                    sign_mask=tuple(tuple(decode_int(s, "sign_mask") for s in row) for row in mask) if mask else None,
                    i=decode_int(entry.get("i", 1), "i"),
                    j=decode_int(entry.get("j", perm[-1] if perm else 0), "j"),
                )
            )
        return FamilyDocument(
            dim=dim,
            qs=tuple(decode_int(q, "qs") for q in document.get("qs", [])),
            kind=str(document.get("kind", "explicit")),
            members=tuple(members),
        )


def matrix_document(matrix: IntMatrix) -> Dict[str, Any]:
    if not matrix.is_square:
        raise NonSquareError(f"Only square matrices are serialized, got {matrix.rows}x{matrix.cols}")
    return {"dim": matrix.rows, "rows": [[encode_int(v) for v in row] for row in matrix.to_rows()]}


def family_document(members: Sequence[ConstructedMatrix], qs: Sequence[int], kind: str) -> Dict[str, Any]:
    return {
        "dim": members[0].dim if members else 0,
        "qs": [encode_int(q) for q in qs],
        "kind": kind,
        "members": [
            {
                "i": member.i,
                "j": member.j,
                "q": encode_int(member.q),
                "perm": list(member.perm),
                "sign_mask": [list(row) for row in member.sign_mask] if member.sign_mask else None,
                "matrix": matrix_document(member.matrix),
            }
            for member in members
        ],
    }


def residue_document(residue: Residue) -> Dict[str, Any]:
    return {"r": [encode_int(v) for v in residue.r], "modulus": matrix_document(residue.modulus)}


def _dump(document: Dict[str, Any]) -> bytes:
    return (json.dumps(document, indent=2) + "\n").encode("utf-8")


def parse_matrix_file(data: Union[bytes, str]) -> IntMatrix:
    """
    Parse a matrix document.

    Raises:
        ParseError: malformed JSON (with line and column) or non-integer entries
        DimensionMismatchError: rows disagree with each other or with 'dim'
    """
    return DocumentParser().parse(data, "matrix")


def serialize_matrix(matrix: IntMatrix) -> bytes:
    return _dump(matrix_document(matrix))


def serialize_family(members: Sequence[ConstructedMatrix], qs: Sequence[int], kind: str) -> bytes:
    return _dump(family_document(members, qs, kind))


def serialize_residue(residue: Residue) -> bytes:
    return _dump(residue_document(residue))


def read_document(path: Union[str, Path], kind: str = "matrix") -> Any:
    """Read and parse a document from disk."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise ParseError(f"Cannot read {path}: {e}") from e
    logger.debug(f"Reading {kind} document {path}")
    return DocumentParser().parse(data, kind)


def read_feasible_sets(path: Union[str, Path]) -> List[Dict[str, Any]]:
    """Named explicit permutation sets: [{"name", "dim", "perms"}, ...]."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise ParseError(f"Cannot read {path}: {e}") from e
    parser = DocumentParser()
    document = parser._load_json(parser._decode(data))
    if not isinstance(document, list):
        raise ParseError("Feasible-set file must hold a list")

    entries = []
    for index, entry in enumerate(document):
        where = f"feasible set #{index}"
        if not isinstance(entry, dict):
            raise ParseError(f"{where} must be an object")
        missing = [key for key in ("name", "dim", "perms") if key not in entry]
        if missing:
            raise ParseError(f"{where} is missing {', '.join(missing)}")
        if not isinstance(entry["name"], str):
            raise ParseError(f"{where}: name must be a string")
        perms = entry["perms"]
        if not isinstance(perms, list) or not all(isinstance(p, list) for p in perms):
            raise ParseError(f"{where}: perms must be a list of permutations")
        entries.append(
            {
                "name": entry["name"],
                "dim": decode_int(entry["dim"], f"{where} dim"),
                "perms": [[decode_int(v, f"{where} perms") for v in p] for p in perms],
            }
        )
    return entries
