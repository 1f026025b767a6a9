"""Seeded generator of templated, court-style annotated documents.

Each document carries a small cast of people, court professionals, places
and birth dates. Every cast member is mentioned several times: once in a
formal introduction with strong local cues, then again in weak contexts
where a tagger must rely on the surface form or on the document context.
That repetition is what makes the corpora useful for measuring robustness
to corrupted mentions.
"""

from __future__ import annotations

import random
from typing import Optional

from .corpus import Corpus, Document, Sentence, Token

FIRST_NAMES = (
    "Jean", "Marie", "Pierre", "Sophie", "Luc", "Camille", "Jérémy", "Léa",
    "Nicolas", "Claire", "Paul", "Julie", "Antoine", "Élise", "Hugo", "Manon",
    "Louis", "Chloé", "Thomas", "Anne", "Léo", "Emma", "Victor", "Alice",
    "Mathieu", "Inès", "Olivier", "Sarah", "Damien", "Laura", "Rémi", "Nadia",
    "Gilles", "Fanny", "Bruno", "Céline", "Yves", "Margaux", "Alain", "Odile",
)

LAST_NAMES = (
    "Dupont", "Lavergne", "Martin", "Bernard", "Durand", "Moreau", "Lefebvre",
    "Garcia", "Roux", "Fournier", "Girard", "Lambert", "Mercier", "Blanc",
    "Henry", "Rousseau", "Masson", "Marchand", "Duval", "Denis", "Lemaire",
    "Noël", "Perrin", "Renard", "Arnaud", "Picard", "Roger", "Schmitt",
    "Colin", "Meyer", "Dufour", "Barbier", "Brun", "Leclerc", "Carpentier",
    "Moulin", "Deschamps", "Tessier", "Vidal", "Charpentier", "Maillard",
    "Baron", "Bertin", "Marty", "Pons", "Delaunay", "Aubert", "Guérin",
)

CITIES = (
    "Paris", "Lyon", "Marseille", "Toulouse", "Nice", "Nantes", "Strasbourg",
    "Montpellier", "Bordeaux", "Lille", "Rennes", "Reims", "Toulon",
    "Grenoble", "Dijon", "Angers", "Nîmes", "Limoges", "Tours", "Amiens",
    "Metz", "Besançon", "Orléans", "Rouen", "Nancy", "Avignon", "Poitiers",
    "Versailles", "Colmar", "Bayonne",
)

MONTHS = (
    "janvier", "février", "mars", "avril", "mai", "juin", "juillet", "août",
    "septembre", "octobre", "novembre", "décembre",
)

# Corporate parties: capitalized, often surname-shaped, but outside the four
# annotated classes, so they are plain O tokens. They occupy the same weak
# sentence frames as people, which keeps capitalization and frame position
# from giving a mention's class away.
COMPANIES = (
    "Delmont", "Arnoux", "Bessard", "Coutard", "Vernier", "Malet", "Grandin",
    "Perrault", "Chabrol", "Delorme", "Sogex", "Altrans", "Batimex",
    "Ferronor", "Clinorex", "Vidalor", "Armatis", "Brossard", "Lantier",
    "Cormont", "Stefal", "Ronchin", "Calvet", "Ormesson",
)

# Formal introductions: full mentions with strong local cues.
_INTRO_TEMPLATES = (
    "Madame {per} , née le {date} à {loc} , a saisi le tribunal .",
    "Monsieur {per} , né le {date} à {loc} , conteste la demande .",
    "La requête de Madame {per} , née le {date} à {loc} , est recevable .",
    "Le dossier concerne Monsieur {per} , né le {date} , domicilié à {loc} .",
)

_COMPANY_INTRO_TEMPLATES = (
    "La société {company} , représentée par Maître {pro} , conteste la demande .",
    "La société {company} a formé appel du jugement .",
)

_PRO_FULL_TEMPLATES = (
    "Monsieur {per_last} est représenté par Maître {pro} , avocat au barreau de {loc} .",
    "Les conclusions ont été déposées par Maître {pro} pour la partie adverse .",
    "La cour , présidée par Madame {pro} , a entendu les parties .",
    "Maître {pro} a sollicité un renvoi de l'affaire .",
)

# Later mentions in weak contexts: the neighbors also occur around plain
# words, so recognizing the mention leans on its surface form or on the
# document context.
_WEAK_PER_TEMPLATES = (
    "Elle déclare que {per_last} et {per_last2} souhaitent vivre ensemble .",
    "Selon les écritures , {per_last} ne justifie pas de sa situation .",
    "{per_last} conteste les faits qui lui sont reprochés .",
    "Il ressort des pièces que {per_last} réside à {loc} depuis plusieurs années .",
    "Elle indique que {per_first} et {per_first2} sont scolarisés à {loc} .",
    "Le courrier adressé à {per_last} est resté sans réponse .",
    "{per_last} a quitté {loc} au cours de la procédure .",
    "Les demandes formées par {per_last} sont rejetées .",
    "Il est constant que {per_first} vit chez sa mère .",
    "Le véhicule appartenant à {per_last} a été saisi .",
    "Il est établi que {per_last} ne conteste plus la mesure .",
    "Aux termes du courrier , {per_first} demeure sans emploi .",
)

_WEAK_PRO_TEMPLATES = (
    "Les honoraires de {pro_last} restent à la charge du demandeur .",
    "Le mémoire déposé par {pro_last} sera écarté des débats .",
    "{pro_last} a été entendu en sa plaidoirie .",
    "La note adressée par {pro_last} a été versée au dossier .",
)

# A birth date restated outside its introduction, so a corrupted date can
# still have a clean twin in the document.
_DATE_RECAP_TEMPLATES = (
    "L'acte de naissance mentionne la date du {date} .",
    "La date de naissance du {date} est confirmée par les pièces .",
)

# Procedural boilerplate without entities; keeps capitalization and the
# frequent function words non-diagnostic on their own.
_BOILERPLATE = (
    "Attendu que la procédure est régulière en la forme .",
    "Considérant les pièces versées au dossier et les moyens échangés .",
    "La demande est recevable et régulière .",
    "Les dépens sont réservés jusqu'à la décision au fond .",
    "Le jugement a été mis en délibéré .",
    "Vu les articles applicables du code de procédure civile .",
    "L'audience s'est tenue publiquement .",
    "Attendu que les parties ont été régulièrement convoquées .",
    "La cour statue publiquement et en dernier ressort .",
)

_TaggedTokens = list[tuple[str, str]]
_Person = tuple[str, str]


def _entity(tokens: list[str], entity_type: str) -> _TaggedTokens:
    return [(tok, ("B-" if i == 0 else "I-") + entity_type) for i, tok in enumerate(tokens)]


def _fill(template: str, values: dict[str, _TaggedTokens]) -> _TaggedTokens:
    tagged: _TaggedTokens = []
    for part in template.split():
        if part.startswith("{") and part.endswith("}"):
            tagged.extend(values[part[1:-1]])
        else:
            tagged.append((part, "O"))
    if tagged[0][0] == "la":  # a filled slot opened the sentence
        tagged[0] = ("La", tagged[0][1])
    return tagged


# Parties and court professionals draw on separate name pools: in a corpus
# this small, letting the same surname serve both roles would make the role
# of a mention unlearnable from its surface form.
_PER_FIRSTS, _PRO_FIRSTS = FIRST_NAMES[:28], FIRST_NAMES[28:]
_PER_LASTS, _PRO_LASTS = LAST_NAMES[:32], LAST_NAMES[32:]

# Party surnames and company names split by corpus role: people mostly occur
# in a single decision and new corporate litigants keep appearing, so an
# evaluation split should not reuse the training split's surnames. First
# names and professionals' names do legitimately repeat and stay shared.
_SPLIT_POOLS = {
    "train": (_PER_LASTS[:20], COMPANIES[:16]),
    "eval": (_PER_LASTS[20:], COMPANIES[16:]),
}


class _Cast:
    """The recurring people, places and dates of one document."""

    def __init__(self, rng: random.Random, split: str = "train") -> None:
        per_lasts, companies = _SPLIT_POOLS[split]
        n_per = rng.randint(1, 3)
        n_pro = rng.randint(1, 2)
        self.pers: list[_Person] = list(
            zip(rng.sample(_PER_FIRSTS, n_per), rng.sample(per_lasts, n_per))
        )
        self.pros: list[_Person] = list(
            zip(rng.sample(_PRO_FIRSTS, n_pro), rng.sample(_PRO_LASTS, n_pro))
        )
        self.locs = rng.sample(CITIES, rng.randint(1, 2))
        self.companies = rng.sample(companies, rng.randint(1, 2))
        self.birthdates: dict[_Person, list[str]] = {
            per: [str(rng.randint(1, 28)), rng.choice(MONTHS), str(rng.randint(1950, 2005))]
            for per in self.pers
        }

    def other_per(self, per: _Person, rng: random.Random) -> _Person:
        others = [p for p in self.pers if p != per]
        return rng.choice(others) if others else per

    def loc(self, rng: random.Random) -> _TaggedTokens:
        return _entity([rng.choice(self.locs)], "LOC")

    def company(self, rng: random.Random) -> _TaggedTokens:
        # Half the time the legal form is spelled out, as decisions do.
        name = rng.choice(self.companies)
        if rng.random() < 0.5:
            return [("la", "O"), ("société", "O"), (name, "O")]
        return [(name, "O")]


def _weak_per_sentence(
    cast: _Cast, per: _Person, rng: random.Random, company_share: float = 0.15
) -> _TaggedTokens:
    template = rng.choice(_WEAK_PER_TEMPLATES)
    other = cast.other_per(per, rng)
    values = {
        "per_last": _entity([per[1]], "PER"),
        "per_first": _entity([per[0]], "PER"),
        "per_last2": _entity([other[1]], "PER"),
        "per_first2": _entity([other[0]], "PER"),
        "loc": cast.loc(rng),
    }
    # A company takes the party slot now and then, so the frame alone never
    # identifies the slot as a person.
    if rng.random() < company_share:
        values["per_last"] = cast.company(rng)
        values["per_first"] = cast.company(rng)
    if rng.random() < 0.08:
        values["per_last2"] = cast.company(rng)
        values["per_first2"] = cast.company(rng)
    return _fill(template, values)


def generate_document(rng: random.Random, doc_id: str, split: str = "train") -> Document:
    """One document: formal introductions first, then a shuffled mix of
    weak-context mentions, date recaps and boilerplate.

    Every person gets an introduction plus at least one weak mention, every
    professional a full mention plus a weak one, and each birth date a
    recap, so each entity string usually has a clean occurrence somewhere
    in the document.
    """
    cast = _Cast(rng, split)
    bodies: list[_TaggedTokens] = []
    for per in cast.pers:
        template = rng.choice(_INTRO_TEMPLATES)
        values = {
            "per": _entity(list(per), "PER"),
            "date": _entity(cast.birthdates[per], "DATE"),
            "loc": cast.loc(rng),
        }
        bodies.append(_fill(template, values))

    # Each cast company is formally introduced before its bare mentions, the
    # way parties are, anchoring its non-person role at least once.
    rest: list[_TaggedTokens] = []
    for company in cast.companies:
        template = rng.choice(_COMPANY_INTRO_TEMPLATES)
        values = {
            "company": [(company, "O")],
            "pro": _entity(list(rng.choice(cast.pros)), "PRO"),
        }
        rest.append(_fill(template, values))
    for pro in cast.pros:
        template = rng.choice(_PRO_FULL_TEMPLATES)
        values = {
            "pro": _entity(list(pro), "PRO"),
            "per_last": _entity([rng.choice(cast.pers)[1]], "PER"),
            "loc": cast.loc(rng),
        }
        rest.append(_fill(template, values))
        rest.append(
            _fill(rng.choice(_WEAK_PRO_TEMPLATES), {"pro_last": _entity([pro[1]], "PRO")})
        )
    for per in cast.pers:
        for _ in range(rng.randint(1, 2)):
            rest.append(_weak_per_sentence(cast, per, rng))
        rest.append(
            _fill(
                rng.choice(_DATE_RECAP_TEMPLATES),
                {"date": _entity(cast.birthdates[per], "DATE")},
            )
        )
    for _ in range(rng.randint(1, 3)):
        rest.append(_weak_per_sentence(cast, rng.choice(cast.pers), rng))
    for template in rng.sample(_BOILERPLATE, rng.randint(1, 2)):
        rest.append(_fill(template, {}))
    rng.shuffle(rest)

    sentences = tuple(
        Sentence(tuple(Token(surface, label) for surface, label in tagged), i)
        for i, tagged in enumerate(bodies + rest)
    )
    return Document(sentences, doc_id)


def generate_corpus(
    n_docs: int,
    seed: int = 0,
    rng: Optional[random.Random] = None,
    split: str = "train",
) -> Corpus:
    """A corpus of `n_docs` generated documents, deterministic per seed."""
    if split not in _SPLIT_POOLS:
        raise ValueError(f"split must be one of {sorted(_SPLIT_POOLS)}, got {split!r}")
    rng = rng or random.Random(seed)
    return Corpus(tuple(generate_document(rng, f"d{i:04d}", split) for i in range(n_docs)))


def generate_benchmark(
    seed: int = 0,
    n_train: int = 140,
    n_dev: int = 20,
    n_test: int = 100,
    natural_typo_rate: float = 0.10,
) -> tuple[Corpus, Corpus, Corpus]:
    """Train/dev/test corpora drawn from one seeded stream.

    The training split carries a light rate of natural typos, as real
    annotated documents do; a second-pass model trained on it therefore sees
    imperfect first-pass behavior instead of a perfectly memorized corpus.
    Dev and test stay clean so corruption experiments control their own
    noise.
    """
    from .typos import TypoConfig, inject

    rng = random.Random(seed)
    train = generate_corpus(n_train, rng=rng, split="train")
    dev = generate_corpus(n_dev, rng=rng, split="eval")
    test = generate_corpus(n_test, rng=rng, split="eval")
    if natural_typo_rate > 0:
        config = TypoConfig(
            rate=natural_typo_rate, target="all_tokens", seed=rng.randrange(2**32)
        )
        train, _ = inject(train, config)
    return train, dev, test
