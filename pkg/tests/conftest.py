import random
import string
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from muler.corpus import AnnotatedSentence, ParallelCorpus, SentencePair
from muler.features import FeatureCategory, FeatureSpec

DATA_DIR = Path(__file__).parent / "data"

# Tag inventory of the procedural generator; word counts sum to 50.
GEN_GROUPS = {
    "POS:NOUN": 15,
    "POS:VERB": 10,
    "POS:ADJ": 9,
    "POS:ADV": 8,
    "POS:DET": 8,
}


def _make_vocab(rng: random.Random, scale: int = 1) -> dict[str, list[str]]:
    """Deterministic vocabulary; first letters cycle so alphabet splits
    always see many distinct letters."""
    vocab: dict[str, list[str]] = {}
    used: set[str] = set()
    for feature_id, count in GEN_GROUPS.items():
        words = []
        for i in range(count * scale):
            while True:
                first = string.ascii_lowercase[i % 26]
                rest = "".join(
                    rng.choice(string.ascii_lowercase) for _ in range(rng.randint(3, 6))
                )
                word = first + rest
                if word not in used:
                    used.add(word)
                    words.append(word)
                    break
        vocab[feature_id] = words
    return vocab


def synthetic_corpus(
    n_pairs: int,
    seed: int = 0,
    corruption=0.5,
    length_range=(3, 25),
    noun_density=(0.1, 0.3),
    vocab_scale: int = 1,
) -> ParallelCorpus:
    """Procedurally generated annotated corpus.

    Every token belongs to one tag group (word-identity tagging, single
    token spans). The candidate copies the reference, independently
    replacing each token with another word of the same group at the
    corruption rate; ``corruption`` may be a float or a per-feature dict.
    ``vocab_scale`` multiplies the 50-word base vocabulary.
    """
    rng = random.Random(seed)
    vocab = _make_vocab(rng, vocab_scale)
    group_ids = list(GEN_GROUPS)
    non_noun = [g for g in group_ids if g != "POS:NOUN"]

    def rate_for(group: str) -> float:
        if isinstance(corruption, dict):
            return corruption.get(group, corruption.get("default", 0.0))
        return corruption

    pairs = []
    for k in range(n_pairs):
        length = rng.randint(*length_range)
        density = rng.uniform(*noun_density)
        n_nouns = max(1, round(length * density))
        noun_positions = set(rng.sample(range(length), min(n_nouns, length)))
        words, groups = [], []
        for i in range(length):
            group = "POS:NOUN" if i in noun_positions else rng.choice(non_noun)
            words.append(rng.choice(vocab[group]))
            groups.append(group)
        cand_words = []
        for word, group in zip(words, groups):
            if rng.random() < rate_for(group):
                others = [w for w in vocab[group] if w != word]
                cand_words.append(rng.choice(others))
            else:
                cand_words.append(word)
        spans = [(i, i + 1, g) for i, g in enumerate(groups)]
        ref = AnnotatedSentence.from_words(words, spans)
        cand = AnnotatedSentence.from_words(cand_words, spans)
        pairs.append(
            SentencePair(references=(ref,), candidate=cand, pair_id=f"p{k:04d}")
        )
    return ParallelCorpus(pairs=tuple(pairs), metadata={"generator_seed": str(seed)})


def fruit_pair() -> SentencePair:
    ref = AnnotatedSentence.from_words(
        "John likes apples and oranges".split(),
        [(2, 3, "POS:NOUN"), (4, 5, "POS:NOUN")],
    )
    cand = AnnotatedSentence.from_words(
        "John loves bananas and apples".split(),
        [(2, 3, "POS:NOUN"), (4, 5, "POS:NOUN")],
    )
    return SentencePair(references=(ref,), candidate=cand, pair_id="p1")


@pytest.fixture
def fruit_corpus() -> ParallelCorpus:
    return ParallelCorpus(pairs=(fruit_pair(),), metadata={})


@pytest.fixture
def noun_spec() -> FeatureSpec:
    return FeatureSpec("POS:NOUN", FeatureCategory.POS)


def winogender_corpus() -> ParallelCorpus:
    """Minimal pairs differing only in one pronoun."""
    templates = [
        "The technician told the customer that {p} could pay with cash online today .",
        "The supervisor gave the employee feedback on {q} stellar performance this quarter .",
        "The librarian helped the child pick a book because {p} did not know what to read .",
        "The engineer informed the client that {p} would finish the bridge design soon .",
        "The paramedic assured the patient that {p} would recover fully within weeks .",
        "The accountant warned the manager that {p} had missed the filing deadline again .",
        "The plumber promised the tenant that {p} would repair the leaking pipe tomorrow .",
        "The teacher reminded the student that {p} should submit the essay by Friday .",
        "The cashier told the shopper that {p} could return the item within a month .",
        "The architect showed the investor why {p} preferred the cheaper steel frame .",
        "The surgeon explained to the relative that {p} had removed the tumor completely .",
        "The barista asked the regular whether {p} wanted the usual drink this morning .",
        "The mechanic advised the driver that {p} should replace the worn brake pads .",
        "The dentist warned the patient that {p} needed to floss far more often .",
        "The lawyer counseled the witness before {p} entered the crowded federal courtroom .",
        "The pilot informed the passenger that {p} could stow the bag overhead .",
        "The tailor measured the customer so that {p} could fit the new jacket .",
        "The banker called the borrower after {p} missed the second mortgage payment .",
        "The coach benched the striker because {p} skipped the morning training session .",
        "The editor praised the reporter when {q} investigation won the national award .",
    ]
    pairs = []
    for i, template in enumerate(templates):
        fem = template.format(p="she", q="her").split()
        masc = template.format(p="he", q="his").split()
        pairs.append(
            SentencePair(
                references=(AnnotatedSentence.from_words(fem),),
                candidate=AnnotatedSentence.from_words(masc),
                pair_id=f"wg{i:02d}",
            )
        )
    return ParallelCorpus(pairs=tuple(pairs), metadata={"system": "winogender-pairs"})


def paraphrase_corpus() -> ParallelCorpus:
    """Active references against passive candidates, with auxiliary tags.

    References carry no AUX tokens; every passive candidate gains one
    ("was"/"were"), tagged explicitly.
    """
    cases = [
        ("She took the book", "The book was taken by her", 2),
        ("He wrote the letter", "The letter was written by him", 2),
        ("The dog chased the cat", "The cat was chased by the dog", 2),
        ("They built the house", "The house was built by them", 2),
        ("She painted the fence", "The fence was painted by her", 2),
        ("The chef cooked the meal", "The meal was cooked by the chef", 2),
        ("He repaired the engines", "The engines were repaired by him", 2),
        ("The jury reached the verdict", "The verdict was reached by the jury", 2),
        ("She solved the puzzles", "The puzzles were solved by her", 2),
        ("The storm destroyed the barn", "The barn was destroyed by the storm", 2),
    ]
    pairs = []
    for i, (active, passive, aux_pos) in enumerate(cases):
        ref = AnnotatedSentence.from_words(active.split())
        cand = AnnotatedSentence.from_words(
            passive.split(), [(aux_pos, aux_pos + 1, "POS:AUX")]
        )
        pairs.append(
            SentencePair(references=(ref,), candidate=cand, pair_id=f"ap{i:02d}")
        )
    return ParallelCorpus(pairs=tuple(pairs), metadata={"system": "active-passive"})
