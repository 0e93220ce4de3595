ALPHABET = "ACDEFGHIKLMNPQRSTVWY"
MASK_INDEX = len(ALPHABET)
MASK_LETTER = "X"
NUM_CLASSES = len(ALPHABET)

THREE_TO_ONE = {
    "ALA": "A", "CYS": "C", "ASP": "D", "GLU": "E", "PHE": "F",
    "GLY": "G", "HIS": "H", "ILE": "I", "LYS": "K", "LEU": "L",
    "MET": "M", "ASN": "N", "PRO": "P", "GLN": "Q", "ARG": "R",
    "SER": "S", "THR": "T", "VAL": "V", "TRP": "W", "TYR": "Y",
}
ONE_TO_THREE = {one: three for three, one in THREE_TO_ONE.items()}

_LETTER_INDEX = {letter: i for i, letter in enumerate(ALPHABET)}


def letter_to_index(letter: str) -> int:
    """Unknown or nonstandard letters map to the mask token."""
    return _LETTER_INDEX.get(letter.upper(), MASK_INDEX)


def residue_to_index(resname: str) -> int:
    return letter_to_index(THREE_TO_ONE.get(resname.strip().upper(), MASK_LETTER))


def index_to_letter(index: int) -> str:
    return ALPHABET[index] if 0 <= index < NUM_CLASSES else MASK_LETTER


def encode(sequence: str) -> list[int]:
    return [letter_to_index(letter) for letter in sequence]


def decode(indices) -> str:
    return "".join(index_to_letter(int(i)) for i in indices)
