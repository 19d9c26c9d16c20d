"""Synthetic desk-scale corpus generator.

Templates inject multi-word adverse-event phrases from a fixed 40-phrase
lexicon into carrier sentences; about 30% of the samples are negatives.
Gold spans are exact by construction, which makes the corpus suitable for
learnability checks without any real annotated data.
"""

import random

from .corpus import AnnotatedSample, CharSpan, Corpus
from .labeling import split_words
from .tokenizer import Vocabulary, build_fixture_vocab

ADE_PHRASES = (
    "heightened anxiety levels",
    "severe stomach cramps",
    "constant dry mouth",
    "blurred vision spells",
    "loss of appetite",
    "sharp chest pain",
    "ringing in ears",
    "trouble falling asleep",
    "sudden weight gain",
    "persistent muscle weakness",
    "cold night sweats",
    "racing heart beat",
    "burning skin rash",
    "short term memory loss",
    "feeling generally unwell",
    "numb finger tips",
    "swollen ankle joints",
    "heavy morning drowsiness",
    "frequent panic attacks",
    "intense joint stiffness",
    "uncontrollable hand tremors",
    "dull constant headache",
    "waves of nausea",
    "itchy red patches",
    "painful leg cramps",
    "extreme daytime fatigue",
    "shortness of breath",
    "metallic taste issues",
    "spinning dizzy spells",
    "tingling facial numbness",
    "severe hair thinning",
    "aching lower back",
    "upset acid stomach",
    "restless leg twitching",
    "cloudy foggy thinking",
    "random hot flashes",
    "bleeding gum problems",
    "brittle finger nails",
    "excessive night thirst",
    "sore throat swelling",
)

CARRIERS = (
    "after taking the pills i noticed {} for days",
    "the new medication gave me {} almost immediately",
    "since starting this drug i keep getting {}",
    "my doctor warned me but now i have {}",
    "two weeks on it and the {} will not stop",
    "i stopped the treatment because of {}",
    "been dealing with {} ever since the dose went up",
    "this medicine caused {} within hours",
)

NEGATIVE_SENTENCES = (
    "the medication works fine and i feel great",
    "no problems at all since starting the treatment",
    "my doctor says everything looks completely normal",
    "this drug really helped with my condition",
    "i would recommend this medicine to anyone",
    "the new dose seems perfectly fine so far",
    "feeling healthy and sleeping well these days",
    "the pharmacy refilled my prescription without issues",
)


def generate_corpus(n_samples: int, seed: int, negative_fraction: float = 0.3, prefix: str = "syn") -> Corpus:
    """Deterministic synthetic corpus with exact gold spans."""
    rng = random.Random(seed)
    samples = []
    for i in range(n_samples):
        sid = f"{prefix}{i:04d}"
        if rng.random() < negative_fraction:
            text = rng.choice(NEGATIVE_SENTENCES)
            samples.append(AnnotatedSample(sid, text, (), "unlabeled", {"source": "synthetic"}))
        else:
            carrier = rng.choice(CARRIERS)
            phrase = rng.choice(ADE_PHRASES)
            start = carrier.index("{}")
            text = carrier.format(phrase)
            span = CharSpan(start, start + len(phrase))
            samples.append(AnnotatedSample(sid, text, (span,), "unlabeled", {"source": "synthetic"}))
    return Corpus(tuple(samples))


def corpus_vocabulary(*corpora) -> Vocabulary:
    """Fixture vocabulary covering every word of the given corpora."""
    words = [w.text for corpus in corpora for s in corpus for w in split_words(s.text)]
    return build_fixture_vocab(words)
