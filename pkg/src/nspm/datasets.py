"""Bundled sample inputs: a synthetic movie knowledge base and templates.

The knowledge base imitates a DBpedia movie subset (films, people,
cities) with Zipf-distributed popularity, so degree ranking is skewed the
way real link counts are.  Labels are pronounceable pseudo-words.
"""
import argparse
import random
from importlib import resources

from .kb_catalog import IRI, RDF_TYPE, RDFS_LABEL, RDFLiteral, Triple, serialize_ntriples

DBR = "http://dbpedia.org/resource/"
DBO = "http://dbpedia.org/ontology/"
XSD = "http://www.w3.org/2001/XMLSchema#"

_ONSETS = ["b", "br", "c", "d", "dr", "f", "g", "gr", "h", "k", "l", "m", "n", "p", "r", "s",
           "st", "t", "tr", "v", "w", "z"]
_VOWELS = ["a", "e", "i", "o", "u", "ai", "ei", "ou"]
_CODAS = ["", "", "n", "r", "l", "s", "th", "m", "x"]


def _word(rng, syllables):
    return "".join(rng.choice(_ONSETS) + rng.choice(_VOWELS) for _ in range(syllables - 1)) + \
        rng.choice(_ONSETS) + rng.choice(_VOWELS) + rng.choice(_CODAS)


def _unique_names(rng, n, make):
    seen, out = set(), []
    while len(out) < n:
        name = make()
        if name.lower() not in seen:
            seen.add(name.lower())
            out.append(name)
    return out


def _zipf_choice(rng, items, k=1):
    weights = [1.0 / (i + 1) for i in range(len(items))]
    picked = []
    while len(picked) < k:
        item = rng.choices(items, weights)[0]
        if item not in picked:
            picked.append(item)
    return picked


def make_movie_triples(n_films=360, n_people=180, n_cities=20, n_collisions=3, seed=7):
    """Generate the synthetic movie knowledge base as a list of triples."""
    rng = random.Random(seed)
    type_ = IRI(RDF_TYPE)
    label = IRI(RDFS_LABEL)
    triples = []

    def add_entity(local, text, cls, lang="en"):
        uri = IRI(DBR + local)
        triples.append(Triple(uri, type_, IRI(DBO + cls)))
        triples.append(Triple(uri, label, RDFLiteral(text, lang)))
        return uri

    city_names = _unique_names(rng, n_cities, lambda: _word(rng, 2).capitalize())
    cities = [add_entity(name, name, "City") for name in city_names]

    person_names = _unique_names(
        rng, n_people, lambda: f"{_word(rng, 2).capitalize()} {_word(rng, rng.choice((2, 3))).capitalize()}")
    people = []
    for name in person_names:
        uri = add_entity(name.replace(" ", "_"), name, "Person")
        people.append(uri)
        triples.append(Triple(uri, IRI(DBO + "birthPlace"), _zipf_choice(rng, cities)[0]))
        year = rng.randint(1930, 1995)
        triples.append(Triple(uri, IRI(DBO + "birthDate"),
                              RDFLiteral(f"{year}-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}", None, XSD + "date")))

    def film_title():
        words = [_word(rng, rng.choice((2, 3))).capitalize() for _ in range(rng.choice((1, 1, 2)))]
        if rng.random() < 0.2:
            words.insert(0, "The")
        return " ".join(words)

    titles = _unique_names(rng, n_films, film_title)
    films = []
    for k, title in enumerate(titles):
        local = title.replace(" ", "_")
        if k >= n_films - n_collisions:
            # A second film sharing the label of a popular one.
            title = titles[k - (n_films - n_collisions)]
            local = title.replace(" ", "_") + f"_({rng.randint(1990, 2015)}_film)"
        uri = add_entity(local, title, "Film")
        films.append(uri)
        if rng.random() < 0.1:
            triples.append(Triple(uri, label, RDFLiteral(title + " (Film)", "de")))
        directors = people[: max(10, n_people // 3)]
        triples.append(Triple(uri, IRI(DBO + "director"), _zipf_choice(rng, directors)[0]))
        for actor in _zipf_choice(rng, people, rng.randint(2, 4)):
            triples.append(Triple(uri, IRI(DBO + "starring"), actor))
        for prop in ("writer", "producer", "musicComposer"):
            triples.append(Triple(uri, IRI(DBO + prop), _zipf_choice(rng, people)[0]))
        year = rng.randint(1950, 2018)
        triples.append(Triple(uri, IRI(DBO + "releaseDate"),
                              RDFLiteral(f"{year}-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}", None, XSD + "date")))
        triples.append(Triple(uri, IRI(DBO + "runtime"), RDFLiteral(str(rng.randint(75, 190) * 60), None, XSD + "double")))
        triples.append(Triple(uri, IRI(DBO + "country"), _zipf_choice(rng, cities)[0]))
    # Popular films get extra inbound links (sequels, awards) to skew degree.
    for film in _zipf_choice(rng, films, n_films // 4):
        other = rng.choice(films)
        if other != film:
            triples.append(Triple(other, IRI(DBO + "subsequentWork"), film))
    return triples


def bundled_path(name):
    """Filesystem path of a bundled data file (``movies.nt``, ``templates.tsv``)."""
    return str(resources.files("nspm").joinpath("data", name))


def main(argv=None):
    parser = argparse.ArgumentParser(description="Write the synthetic movie knowledge base as N-Triples.")
    parser.add_argument("out")
    parser.add_argument("--films", type=int, default=360)
    parser.add_argument("--people", type=int, default=180)
    parser.add_argument("--cities", type=int, default=20)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args(argv)
    triples = make_movie_triples(args.films, args.people, args.cities, seed=args.seed)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(serialize_ntriples(triples))


if __name__ == "__main__":
    main()
