from pathlib import Path

from vfnif.data.alphabet import decode, encode

LINE_WIDTH = 60


def format_fasta(predictions, names) -> str:
    lines = []
    for name, indices in zip(names, predictions):
        seq = decode(indices)
        lines.append(f">{name}")
        lines.extend(seq[i:i + LINE_WIDTH] for i in range(0, len(seq), LINE_WIDTH))
    return "\n".join(lines) + "\n"


def write_fasta(predictions, names, path: str | Path) -> None:
    Path(path).write_text(format_fasta(predictions, names))


def read_fasta(path: str | Path) -> dict[str, list[int]]:
    records: dict[str, list[str]] = {}
    current = None
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith(">"):
            current = line[1:].strip()
            records[current] = []
        elif current is not None:
            records[current].append(line)
    return {name: encode("".join(chunks)) for name, chunks in records.items()}
