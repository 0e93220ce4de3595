"""Fixed-column PDB backbone reader and writer."""
import logging
from pathlib import Path

import numpy as np

from vfnif.data.alphabet import MASK_INDEX, ONE_TO_THREE, index_to_letter, residue_to_index
from vfnif.data.structure import ATOM_NAMES, BackboneStructure
from vfnif.errors import PdbParseError

logger = logging.getLogger(__name__)

_REQUIRED = ("N", "CA", "C")
_COORD_RECORDS = ("ATOM", "HETATM")


def _field(line: str, start: int, end: int) -> str:
    """1-indexed inclusive column range."""
    return line[start - 1:end]


def _coord(line: str, line_number: int) -> np.ndarray:
    try:
        return np.array([
            float(_field(line, 31, 38)),
            float(_field(line, 39, 46)),
            float(_field(line, 47, 54)),
        ])
    except ValueError:
        raise PdbParseError(
            f"unparseable coordinate field {line[30:54]!r}", line_number=line_number
        ) from None


def parse_pdb(text: str, name: str = "", chain: str | None = None) -> BackboneStructure:
    """
    Reads ATOM and HETATM records of the first model. Keeps the first altLoc
    seen for each atom, the first chain unless one is requested, and residues
    in file order (insertion codes included). Nonstandard residue names map
    to the mask token. Residues without N/CA/C are dropped and listed in
    `dropped`; HETATM groups with none of N/CA/C (waters, ligands) are not
    polymer residues and are skipped.
    """
    residues: dict[tuple[str, str, str], dict] = {}
    first_chain: dict[str, str] = {}

    for line_number, line in enumerate(text.splitlines(), start=1):
        record = _field(line, 1, 6).strip()
        if record == "ENDMDL":
            break
        if record == "HEADER" and not name:
            name = _field(line, 63, 66).strip()
            continue
        if record not in _COORD_RECORDS:
            continue
        if len(line.rstrip("\n")) < 54:
            raise PdbParseError(f"{record} record shorter than 54 columns", line_number=line_number)

        xyz = _coord(line, line_number)
        line_chain = _field(line, 22, 22)
        first_chain.setdefault(record, line_chain)
        atom = _field(line, 13, 16).strip()
        if atom not in ATOM_NAMES:
            continue
        key = (line_chain, _field(line, 23, 26).strip(), _field(line, 27, 27).strip())
        residue = residues.setdefault(
            key, {"resname": _field(line, 18, 20).strip(), "atoms": {}, "hetero": True}
        )
        residue["hetero"] &= record == "HETATM"
        # First altLoc wins.
        residue["atoms"].setdefault(atom, xyz)

    # The chain of the first ATOM record wins over a leading hetero chain.
    selected = chain if chain is not None else first_chain.get("ATOM", first_chain.get("HETATM"))
    residues = {key[1:]: residue for key, residue in residues.items() if key[0] == selected}
    if not residues:
        where = f" for chain {chain!r}" if chain is not None else ""
        raise PdbParseError(f"no ATOM or HETATM records{where}")

    sequence, coords, ids, dropped = [], [], [], []
    for (resseq, icode), residue in residues.items():
        rid = f"{resseq}{icode}"
        atoms = residue["atoms"]
        missing = [a for a in _REQUIRED if a not in atoms]
        if residue["hetero"] and len(missing) == len(_REQUIRED):
            logger.debug("Skipping hetero group %s %s", residue["resname"], rid)
            continue
        if missing:
            logger.warning("Dropping residue %s of %s: missing %s", rid, name or "structure", ", ".join(missing))
            dropped.append(rid)
            continue
        coords.append([atoms.get(a, np.full(3, np.nan)) for a in ATOM_NAMES])
        index = residue_to_index(residue["resname"])
        if index == MASK_INDEX:
            logger.info("%s: residue %s %s is nonstandard, masked", name or "structure", residue["resname"], rid)
        sequence.append(index)
        ids.append(rid)

    if not sequence:
        raise PdbParseError("no residue has complete N/CA/C backbone atoms")
    return BackboneStructure(
        name=name or "structure",
        sequence=np.array(sequence),
        coords=np.array(coords),
        chain=selected or "A",
        residue_ids=ids,
        dropped=dropped,
    )


def read_pdb(path: str | Path, chain: str | None = None) -> BackboneStructure:
    path = Path(path)
    return parse_pdb(path.read_text(), name=path.stem, chain=chain)


def format_pdb(structure: BackboneStructure) -> str:
    """Backbone-only ATOM records; missing atoms are omitted."""
    lines = []
    serial = 1
    for i, res_index in enumerate(structure.sequence):
        resname = ONE_TO_THREE.get(index_to_letter(int(res_index)), "UNK")
        rid = structure.residue_ids[i]
        resseq, icode = (rid[:-1], rid[-1]) if rid[-1:].isalpha() else (rid, " ")
        for atom_index, atom in enumerate(ATOM_NAMES):
            x, y, z = structure.coords[i, atom_index]
            if not np.isfinite(x):
                continue
            element = atom[0]
            lines.append(
                f"ATOM  {serial:5d}  {atom:<3s} {resname:3s} {structure.chain:1s}"
                f"{int(resseq):4d}{icode:1s}   {x:8.3f}{y:8.3f}{z:8.3f}"
                f"{1.0:6.2f}{0.0:6.2f}          {element:>2s}"
            )
            serial += 1
    lines.append("END")
    return "\n".join(lines) + "\n"


def write_pdb(structure: BackboneStructure, path: str | Path) -> None:
    Path(path).write_text(format_pdb(structure))
