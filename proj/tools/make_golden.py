#!/usr/bin/env python3
"""Regenerates tests/data/golden_tokens.tsv.

Expected tokens come from an implementation written here against the
documented cleaning rules, NLTK's Porter stemmer (original 1980 mode) and the
stop-word list shipped in src/text.cpp. The C++ pipeline is never invoked.
"""
import html
import pathlib
import re
import sys

from nltk.stem.porter import PorterStemmer

ROOT = pathlib.Path(__file__).resolve().parent.parent
STEMMER = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)
MAX_LEN = 250


def load_stop_words():
    src = (ROOT / "src" / "text.cpp").read_text()
    block = src[src.index("std::vector<std::string> words = {"):]
    block = block[: block.index("};")]
    return set(re.findall(r'"([a-z]+)"', block))


STOP = load_stop_words()
CODE_RE = re.compile(r"<(code|pre)\b[^>/]*>.*?</\1\s*>", re.IGNORECASE | re.DOTALL)
TAG_RE = re.compile(r"<[A-Za-z/!][^>]*>")
ENTITY_RE = re.compile(r"&([A-Za-z0-9#]{1,7});")
URL_RE = re.compile(r"^(https?://|ftp://|www\.)", re.IGNORECASE)
NUMBER_RE = re.compile(r"^[+-]?\d+(?:[.,]\d+)*$")
PUNCT = r"[^A-Za-z0-9\x80-\U0010FFFF\s]"
CAMEL_RE = re.compile(r"(?<=[a-z])(?=[A-Z])|(?<=[A-Za-z])(?=[0-9])")


def entity(m):
    name = m.group(1)
    return {"amp": "&", "lt": "<", "gt": ">", "quot": '"', "#39": "'", "apos": "'"}.get(name, " ")


def clean(raw):
    text = CODE_RE.sub(" ", raw)
    text = TAG_RE.sub(" ", text)
    text = ENTITY_RE.sub(entity, text)
    out = []
    for word in text.split():
        if URL_RE.match(word):
            out.append("urltok")
            continue
        trimmed = re.sub(r"^" + PUNCT + r"*?([+-]?)(?=\d)", r"\1", word)
        trimmed = re.sub(r"^" + PUNCT + r"+", "", trimmed) if not re.match(r"^[+-]\d", trimmed) else trimmed
        trimmed = re.sub(PUNCT + r"+$", "", trimmed)
        if NUMBER_RE.match(trimmed):
            out.append("numtok")
            continue
        for piece in re.split(PUNCT + "+", word):
            if not piece:
                continue
            out.append("numtok" if piece.isdigit() else piece)
    return " ".join(out)


def tokenize(cleaned):
    tokens = []
    for word in cleaned.split():
        for part in CAMEL_RE.split(word):
            low = part.lower()
            if not low or low in STOP:
                continue
            tokens.append(STEMMER.stem(low))
    return tokens


def unit(title, body, answers):
    if answers == "null":
        answers = ""
    toks = tokenize(clean(title)) + tokenize(clean(body)) + tokenize(clean(answers))
    return toks[:MAX_LEN]


def words(n, stem):
    return " ".join(f"{stem}{chr(97 + i // 26 % 26)}{chr(97 + i % 26)}x" for i in range(n))


FIXTURES = [
    ("html_paragraph", "Parsing XML files", "<p>I am <b>reading</b> a file.</p>", ""),
    ("html_attributes", "Links", '<a href="https://example.com/page">click here</a> to continue', ""),
    ("code_block_removed", "Loop question", "<p>Use this:</p><pre><code>for (int i = 0; i < n; ++i) {}</code></pre><p>Why slow?</p>", ""),
    ("inline_code_removed", "Maps", "Call <code>map.get(key)</code> returns null values", ""),
    ("unterminated_tag", "Broken markup", "text <b unterminated and more words", ""),
    ("entities", "Generics", "List&lt;String&gt; &amp; Set&lt;Integer&gt; types", ""),
    ("url_http", "Docs", "see https://x.io now and http://docs.oracle.com/javase", ""),
    ("url_www", "Site", "visit www.stackoverflow.com for answers", ""),
    ("numbers", "Threads", "use 42 threads and 3.14 ratio with -7 offsets, 1,000 rows", ""),
    ("number_in_word", "Versions", "python3 vs java8 and utf-8", ""),
    ("camel_case", "TreeMap getValue", "", ""),
    ("camel_case_acronym", "XMLHttpRequest parseJSON", "", ""),
    ("camel_digits", "Base64Encoder sha256Hash", "", ""),
    ("stop_words_only", "the of and", "it is what it is", "Test"),
    ("stop_words_mixed", "How to remove HTML tag in Java", "", ""),
    ("punctuation", "Why?!", "Hello, world... (really) [yes] {no}; end: done!", ""),
    ("contractions", "Can't compile", "I don't know why it's failing, won't run", ""),
    ("title_body_answers", "Removing html tags with regex Java",
     "<p>I need a regex to strip tags.</p>", "Use Jsoup instead of regex parsing"),
    ("null_answers", "Sorting arrays", "<p>How do I sort an int array?</p>", "null"),
    ("multiline_body", "Multiline", "first line\nsecond\tline\r\nthird", ""),
    ("porter_cases", "generalization agreed happy probabilities", "relational conditional rational", ""),
    ("unicode", "Café naïve résumé", "emoji \u2603 snowman", ""),
    ("truncate_249", words(249, "tok"), "", ""),
    ("truncate_250", words(250, "tok"), "", ""),
    ("truncate_251_across_parts", words(120, "tit"), "<p>" + words(120, "bod") + "</p>", words(11, "ans")),
]


def escape(s):
    return s.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n").replace("\r", "\\r")


def main():
    out = ROOT / "tests" / "data" / "golden_tokens.tsv"
    lines = ["name\ttitle\tbody\tanswers\texpected"]
    for name, title, body, answers in FIXTURES:
        expected = " ".join(unit(title, body, answers))
        lines.append("\t".join(escape(f) for f in (name, title, body, answers, expected)))
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(FIXTURES)} fixtures to {out}", file=sys.stderr)


if __name__ == "__main__":
    main()
