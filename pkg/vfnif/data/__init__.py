from vfnif.data.alphabet import ALPHABET, MASK_INDEX, NUM_CLASSES
from vfnif.data.fasta import read_fasta, write_fasta
from vfnif.data.jsonl import DatasetSplit, read_jsonl, write_jsonl
from vfnif.data.pdb import parse_pdb, read_pdb, write_pdb
from vfnif.data.structure import BackboneStructure, ResidueFlag
from vfnif.data.synthetic import synthetic_backbone

__all__ = [
    "ALPHABET",
    "BackboneStructure",
    "DatasetSplit",
    "MASK_INDEX",
    "NUM_CLASSES",
    "ResidueFlag",
    "parse_pdb",
    "read_fasta",
    "read_jsonl",
    "read_pdb",
    "synthetic_backbone",
    "write_fasta",
    "write_jsonl",
    "write_pdb",
]
