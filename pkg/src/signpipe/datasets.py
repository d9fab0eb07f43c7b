"""Sample manifests, three-protocol split generation and validation, and
dataset statistics.

A manifest is a UTF-8 TSV with header
``clip_id  signer_id  sentence_id  gender  duration_s  transcript``;
the transcript is the final field and may itself contain tabs.

Splits follow a signer/sentence exposure matrix. Two disjoint sentence sets
are held out, plus a set of signers:

    Train = seen signer    x seen sentence
    Test1 = unseen signer  x held-out-set-1 sentence
    Test2 = seen signer    x held-out-set-2 sentence
    Test3 = unseen signer  x seen sentence

Clips in the two remaining cells (unseen signer x held-out-set-2, and seen
signer x held-out-set-1) belong to no protocol and are Excluded; routing
them anywhere else would leak a held-out axis. A test cell's "seen" premise
must also be realized by actual Train membership, so a Test2 clip whose
signer never appears in Train (or a Test3 clip whose sentence never does)
is Excluded as well.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence

MANIFEST_COLUMNS = ("clip_id", "signer_id", "sentence_id", "gender", "duration_s", "transcript")
MANIFEST_HEADER = "\t".join(MANIFEST_COLUMNS)
ASSIGNMENT_HEADER = "clip_id\tsplit"

GENDERS = ("F", "M")


class ManifestError(ValueError):
    """Malformed manifest or assignment file."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class InfeasibleConfig(ValueError):
    pass


class SplitLabel(Enum):
    TRAIN = "Train"
    TEST1 = "Test1"
    TEST2 = "Test2"
    TEST3 = "Test3"
    EXCLUDED = "Excluded"


@dataclass(frozen=True)
class SampleRecord:
    clip_id: str
    signer_id: str
    sentence_id: str
    gender: str
    duration_s: float
    transcript: str

    def __post_init__(self) -> None:
        if self.gender not in GENDERS:
            raise ValueError(f"gender {self.gender!r}, expected one of {GENDERS}")
        if not self.duration_s > 0:
            raise ValueError(f"duration_s {self.duration_s} not > 0")

    @property
    def token_count(self) -> int:
        return len(self.transcript.split())


@dataclass(frozen=True)
class SplitConfig:
    n_unseen_signers: int
    n_unseen_sentences_t1: int
    n_unseen_sentences_t2: int
    rng_seed: int


@dataclass(frozen=True)
class SplitAssignment:
    labels: Mapping[str, SplitLabel]
    held_out_signers: frozenset[str] = frozenset()
    held_out_sentences_t1: frozenset[str] = frozenset()
    held_out_sentences_t2: frozenset[str] = frozenset()
    provenance: Mapping[str, str] = field(default_factory=dict)

    def __getitem__(self, clip_id: str) -> SplitLabel:
        return self.labels[clip_id]


class Lcg64:
    """64-bit linear congruential generator (Knuth's MMIX multiplier).

    The top 32 bits of each state are the output word; bounded draws use
    rejection so every residue is equally likely. Recorded in assignment
    files as ``prng: lcg64-mmix`` so runs can be replayed elsewhere.
    """

    MULTIPLIER = 6364136223846793005
    INCREMENT = 1442695040888963407
    _MASK = (1 << 64) - 1

    name = "lcg64-mmix"

    def __init__(self, seed: int):
        self._state = seed & self._MASK

    def next_word(self) -> int:
        self._state = (self.MULTIPLIER * self._state + self.INCREMENT) & self._MASK
        return self._state >> 32

    def below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 32) - ((1 << 32) % n)
        while True:
            word = self.next_word()
            if word < limit:
                return word % n

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]


def generate_splits(manifest: Sequence[SampleRecord], config: SplitConfig) -> SplitAssignment:
    signers = sorted({r.signer_id for r in manifest})
    sentences = sorted({r.sentence_id for r in manifest})

    n_unseen = config.n_unseen_signers
    n_t1 = config.n_unseen_sentences_t1
    n_t2 = config.n_unseen_sentences_t2
    if min(n_unseen, n_t1, n_t2) < 0:
        raise InfeasibleConfig("held-out counts must be non-negative")
    if n_unseen > len(signers) - 1:
        raise InfeasibleConfig(
            f"{n_unseen} unseen signers leaves no seen signer out of {len(signers)}"
        )
    if n_t1 + n_t2 > len(sentences) - 1:
        raise InfeasibleConfig(
            f"{n_t1} + {n_t2} held-out sentences leaves no seen sentence "
            f"out of {len(sentences)}"
        )
    if n_unseen == 0 and n_t1 > 0:
        raise InfeasibleConfig(
            "held-out-set-1 sentences need unseen signers to form Test1"
        )

    rng = Lcg64(config.rng_seed)
    shuffled_signers = list(signers)
    rng.shuffle(shuffled_signers)
    unseen_signers = frozenset(shuffled_signers[:n_unseen])

    shuffled_sentences = list(sentences)
    rng.shuffle(shuffled_sentences)
    held_t1 = frozenset(shuffled_sentences[:n_t1])
    held_t2 = frozenset(shuffled_sentences[n_t1 : n_t1 + n_t2])

    # "Seen" must be realized by actual Train exposure, not merely "not held
    # out": on sparse manifests a signer may have clips only of held-out
    # sentences (or a sentence only unseen signers). Protocol cells whose
    # seen premise is vacuous go to Excluded, which keeps the containment
    # checks true on any manifest.
    train_signers: set[str] = set()
    train_sentences: set[str] = set()
    for record in manifest:
        if record.signer_id not in unseen_signers and (
            record.sentence_id not in held_t1 and record.sentence_id not in held_t2
        ):
            train_signers.add(record.signer_id)
            train_sentences.add(record.sentence_id)

    labels: dict[str, SplitLabel] = {}
    for record in manifest:
        unseen = record.signer_id in unseen_signers
        if record.sentence_id in held_t1:
            labels[record.clip_id] = SplitLabel.TEST1 if unseen else SplitLabel.EXCLUDED
        elif record.sentence_id in held_t2:
            if unseen or record.signer_id not in train_signers:
                labels[record.clip_id] = SplitLabel.EXCLUDED
            else:
                labels[record.clip_id] = SplitLabel.TEST2
        elif unseen:
            if record.sentence_id in train_sentences:
                labels[record.clip_id] = SplitLabel.TEST3
            else:
                labels[record.clip_id] = SplitLabel.EXCLUDED
        else:
            labels[record.clip_id] = SplitLabel.TRAIN

    return SplitAssignment(
        labels=labels,
        held_out_signers=unseen_signers,
        held_out_sentences_t1=held_t1,
        held_out_sentences_t2=held_t2,
        provenance={"prng": Lcg64.name, "seed": str(config.rng_seed)},
    )


@dataclass(frozen=True)
class SplitStats:
    label: SplitLabel
    clip_count: int
    minutes: float
    unique_sentences: int
    signer_count: int
    female_signers: int
    male_signers: int

    @property
    def gender_tally(self) -> str:
        return f"{self.female_signers}F, {self.male_signers}M"


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[CheckResult, ...]
    stats: tuple[SplitStats, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def violations(self) -> tuple[CheckResult, ...]:
        return tuple(c for c in self.checks if not c.passed)

    def render(self) -> str:
        lines = []
        for check in self.checks:
            mark = "PASS" if check.passed else "FAIL"
            line = f"[{mark}] {check.name}"
            if check.detail:
                line += f": {check.detail}"
            lines.append(line)
        lines.append("")
        lines.extend(self.render_table().splitlines())
        return "\n".join(lines) + "\n"

    def render_table(self) -> str:
        # Exposure flags are structural per protocol, not measured.
        seen_flags = {
            SplitLabel.TRAIN: ("yes", "yes"),
            SplitLabel.TEST1: ("no", "no"),
            SplitLabel.TEST2: ("no", "yes"),
            SplitLabel.TEST3: ("yes", "no"),
            SplitLabel.EXCLUDED: ("-", "-"),
        }
        display = {
            SplitLabel.TRAIN: "Train",
            SplitLabel.TEST1: "Test 1",
            SplitLabel.TEST2: "Test 2",
            SplitLabel.TEST3: "Test 3",
            SplitLabel.EXCLUDED: "Excluded",
        }
        header = ("Split", "Sents", "Min", "Seen Sents", "Seen Signers",
                  "# Samples", "# Signers", "Gender")
        rows = [header]
        for s in self.stats:
            if s.label is SplitLabel.EXCLUDED and s.clip_count == 0:
                continue
            sents_flag, signers_flag = seen_flags[s.label]
            rows.append((
                display[s.label],
                f"{s.clip_count:,}",
                f"{s.minutes:,.2f}",
                sents_flag,
                signers_flag,
                f"{s.unique_sentences:,}",
                f"{s.signer_count:,}",
                s.gender_tally,
            ))
        widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
        out = []
        for row in rows:
            out.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        return "\n".join(out)


def _split_stats(records: Sequence[SampleRecord], label: SplitLabel) -> SplitStats:
    signers = {r.signer_id for r in records}
    # A signer counts toward a gender if any of their clips in this split
    # carries that label, so inconsistent per-clip labels surface in the
    # tallies instead of being silently collapsed.
    female = {r.signer_id for r in records if r.gender == "F"}
    male = {r.signer_id for r in records if r.gender == "M"}
    return SplitStats(
        label=label,
        clip_count=len(records),
        minutes=sum(r.duration_s for r in records) / 60.0,
        unique_sentences=len({r.sentence_id for r in records}),
        signer_count=len(signers),
        female_signers=len(female),
        male_signers=len(male),
    )


def validate_splits(
    manifest: Sequence[SampleRecord], assignment: SplitAssignment
) -> ValidationReport:
    by_split: dict[SplitLabel, list[SampleRecord]] = {label: [] for label in SplitLabel}
    unlabeled = []
    for record in manifest:
        label = assignment.labels.get(record.clip_id)
        if label is None:
            unlabeled.append(record.clip_id)
        else:
            by_split[label].append(record)

    def signers(label: SplitLabel) -> set[str]:
        return {r.signer_id for r in by_split[label]}

    def sentences(label: SplitLabel) -> set[str]:
        return {r.sentence_id for r in by_split[label]}

    train_signers = signers(SplitLabel.TRAIN)
    train_sents = sentences(SplitLabel.TRAIN)

    def disjoint(name: str, left: set[str], right: set[str]) -> CheckResult:
        overlap = left & right
        return CheckResult(
            name,
            not overlap,
            "" if not overlap else f"overlap: {sorted(overlap)[:5]}",
        )

    def subset(name: str, small: set[str], big: set[str]) -> CheckResult:
        stray = small - big
        return CheckResult(
            name,
            not stray,
            "" if not stray else f"outside: {sorted(stray)[:5]}",
        )

    checks = [
        CheckResult(
            "every clip labeled",
            not unlabeled,
            "" if not unlabeled else f"unlabeled: {sorted(unlabeled)[:5]}",
        ),
        disjoint("Test1 signers disjoint from Train", signers(SplitLabel.TEST1), train_signers),
        disjoint("Test1 sentences disjoint from Train", sentences(SplitLabel.TEST1), train_sents),
        subset("Test2 signers within Train", signers(SplitLabel.TEST2), train_signers),
        disjoint("Test2 sentences disjoint from Train", sentences(SplitLabel.TEST2), train_sents),
        disjoint(
            "Test2 sentences disjoint from Test1",
            sentences(SplitLabel.TEST2),
            sentences(SplitLabel.TEST1),
        ),
        disjoint("Test3 signers disjoint from Train", signers(SplitLabel.TEST3), train_signers),
        subset("Test3 sentences within Train", sentences(SplitLabel.TEST3), train_sents),
    ]

    order = (SplitLabel.TRAIN, SplitLabel.TEST1, SplitLabel.TEST2,
             SplitLabel.TEST3, SplitLabel.EXCLUDED)
    stats = tuple(_split_stats(by_split[label], label) for label in order)
    return ValidationReport(checks=tuple(checks), stats=stats)


@dataclass(frozen=True)
class Histogram:
    bin_width: float
    counts: Mapping[int, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def to_csv(self) -> str:
        lines = ["bin_start,bin_end,count"]
        for index in sorted(self.counts):
            start = index * self.bin_width
            end = (index + 1) * self.bin_width
            lines.append(f"{start:g},{end:g},{self.counts[index]}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class DatasetStats:
    duration: Histogram
    tokens: Histogram


def dataset_stats(
    manifest: Sequence[SampleRecord],
    duration_bin_s: float = 1.0,
    token_bin: int = 1,
) -> DatasetStats:
    if not manifest:
        raise ValueError("empty manifest")
    if duration_bin_s <= 0 or token_bin <= 0:
        raise ValueError("bin widths must be positive")
    duration_counts: dict[int, int] = {}
    token_counts: dict[int, int] = {}
    for record in manifest:
        d_bin = int(record.duration_s // duration_bin_s)
        t_bin = record.token_count // token_bin
        duration_counts[d_bin] = duration_counts.get(d_bin, 0) + 1
        token_counts[t_bin] = token_counts.get(t_bin, 0) + 1
    return DatasetStats(
        duration=Histogram(duration_bin_s, duration_counts),
        tokens=Histogram(float(token_bin), token_counts),
    )


def read_manifest(source: IO[str] | str | Path) -> list[SampleRecord]:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8", newline="") as reader:
            return read_manifest(reader)
    lines = source.read().splitlines()
    if not lines:
        raise ManifestError("empty file", line_no=1)
    if lines[0] != MANIFEST_HEADER:
        raise ManifestError(
            f"header {lines[0]!r}, expected {MANIFEST_HEADER!r}", line_no=1
        )
    records = []
    seen_ids: set[str] = set()
    for line_no, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        fields = line.split("\t", maxsplit=5)
        if len(fields) != len(MANIFEST_COLUMNS):
            raise ManifestError(
                f"{len(fields)} fields, expected {len(MANIFEST_COLUMNS)}", line_no
            )
        clip_id, signer_id, sentence_id, gender, duration_text, transcript = fields
        if clip_id in seen_ids:
            raise ManifestError(f"duplicate clip_id {clip_id!r}", line_no)
        seen_ids.add(clip_id)
        try:
            duration_s = float(duration_text)
        except ValueError:
            raise ManifestError(f"duration_s {duration_text!r} not a number", line_no)
        try:
            records.append(
                SampleRecord(
                    clip_id=clip_id,
                    signer_id=signer_id,
                    sentence_id=sentence_id,
                    gender=gender,
                    duration_s=duration_s,
                    transcript=transcript,
                )
            )
        except ValueError as exc:
            raise ManifestError(str(exc), line_no)
    return records


def write_manifest(records: Iterable[SampleRecord], sink: IO[str] | str | Path) -> None:
    if isinstance(sink, (str, Path)):
        with open(sink, "w", encoding="utf-8", newline="") as writer:
            write_manifest(records, writer)
        return
    sink.write(MANIFEST_HEADER + "\n")
    for r in records:
        sink.write(
            f"{r.clip_id}\t{r.signer_id}\t{r.sentence_id}\t{r.gender}"
            f"\t{r.duration_s!r}\t{r.transcript}\n"
        )


def write_assignment(assignment: SplitAssignment, sink: IO[str] | str | Path) -> None:
    if isinstance(sink, (str, Path)):
        with open(sink, "w", encoding="utf-8", newline="") as writer:
            write_assignment(assignment, writer)
        return
    for key, value in assignment.provenance.items():
        sink.write(f"# {key}: {value}\n")
    sink.write(f"# held_out_signers: {','.join(sorted(assignment.held_out_signers))}\n")
    sink.write(
        f"# held_out_sentences_t1: {','.join(sorted(assignment.held_out_sentences_t1))}\n"
    )
    sink.write(
        f"# held_out_sentences_t2: {','.join(sorted(assignment.held_out_sentences_t2))}\n"
    )
    sink.write(ASSIGNMENT_HEADER + "\n")
    for clip_id in sorted(assignment.labels):
        sink.write(f"{clip_id}\t{assignment.labels[clip_id].value}\n")


def read_assignment(source: IO[str] | str | Path) -> SplitAssignment:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8", newline="") as reader:
            return read_assignment(reader)
    provenance: dict[str, str] = {}
    labels: dict[str, SplitLabel] = {}
    comment_keys = {"held_out_signers", "held_out_sentences_t1", "held_out_sentences_t2"}
    held: dict[str, frozenset[str]] = {key: frozenset() for key in comment_keys}
    header_seen = False
    by_value = {label.value: label for label in SplitLabel}
    for line_no, line in enumerate(source.read().splitlines(), start=1):
        if not line:
            continue
        if line.startswith("#"):
            if header_seen:
                raise ManifestError("comment after header", line_no)
            body = line[1:].strip()
            key, sep, value = body.partition(":")
            if not sep:
                raise ManifestError(f"comment {line!r} not 'key: value'", line_no)
            key, value = key.strip(), value.strip()
            if key in comment_keys:
                held[key] = frozenset(v for v in value.split(",") if v)
            else:
                provenance[key] = value
            continue
        if not header_seen:
            if line != ASSIGNMENT_HEADER:
                raise ManifestError(
                    f"header {line!r}, expected {ASSIGNMENT_HEADER!r}", line_no
                )
            header_seen = True
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise ManifestError(f"{len(fields)} fields, expected 2", line_no)
        clip_id, split_text = fields
        if clip_id in labels:
            raise ManifestError(f"duplicate clip_id {clip_id!r}", line_no)
        label = by_value.get(split_text)
        if label is None:
            raise ManifestError(f"unknown split {split_text!r}", line_no)
        labels[clip_id] = label
    if not header_seen:
        raise ManifestError(f"missing header {ASSIGNMENT_HEADER!r}", line_no=1)
    return SplitAssignment(
        labels=labels,
        held_out_signers=held["held_out_signers"],
        held_out_sentences_t1=held["held_out_sentences_t1"],
        held_out_sentences_t2=held["held_out_sentences_t2"],
        provenance=provenance,
    )


def manifest_to_text(records: Iterable[SampleRecord]) -> str:
    buffer = io.StringIO()
    write_manifest(records, buffer)
    return buffer.getvalue()
