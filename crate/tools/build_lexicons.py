#!/usr/bin/env python3
"""Offline generator for the bundled word lists and lexicons.

English pronunciations come from CMUdict (ARPAbet, converted to a
British-leaning IPA). Mandarin labels are the most frequent multi-character
words of the jieba frequency dictionary, romanised with pypinyin and
converted to IPA segment by segment.

Outputs are written to crates/core/data/ and committed; the Rust build
never runs this script.

    pip install cmudict jieba pypinyin
    python3 tools/build_lexicons.py
"""

import os
import unicodedata

import cmudict
import jieba
import pypinyin

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "crates", "core", "data")

EN_SAMPLES = 8
CMN_SAMPLES = 4
CMN_WORDS = 1000

ARPA = {
    "AA": "ɑː", "AE": "æ", "AO": "ɔː", "AW": "aʊ", "AY": "aɪ",
    "EH": "e", "EY": "eɪ", "IH": "ɪ", "IY": "iː", "OW": "əʊ",
    "OY": "ɔɪ", "UH": "ʊ", "UW": "uː",
    "B": "b", "CH": "tʃ", "D": "d", "DH": "ð", "F": "f", "G": "ɡ",
    "HH": "h", "JH": "dʒ", "K": "k", "L": "l", "M": "m", "N": "n",
    "NG": "ŋ", "P": "p", "R": "ɹ", "S": "s", "SH": "ʃ", "T": "t",
    "TH": "θ", "V": "v", "W": "w", "Y": "j", "Z": "z", "ZH": "ʒ",
}


def arpa_to_ipa(phones):
    out = []
    for ph in phones:
        base = ph.rstrip("012")
        stress = ph[len(base):]
        if base == "AH":
            out.append("ə" if stress == "0" else "ʌ")
        elif base == "ER":
            out.append("ə" if stress == "0" else "ɜː")
        else:
            out.append(ARPA[base])
    return out


INITIALS = {
    "b": ["p"], "p": ["pʰ"], "m": ["m"], "f": ["f"],
    "d": ["t"], "t": ["tʰ"], "n": ["n"], "l": ["l"],
    "g": ["k"], "k": ["kʰ"], "h": ["x"],
    "j": ["tɕ"], "q": ["tɕʰ"], "x": ["ɕ"],
    "zh": ["ʈʂ"], "ch": ["ʈʂʰ"], "sh": ["ʂ"], "r": ["ʐ"],
    "z": ["ts"], "c": ["tsʰ"], "s": ["s"],
}

FINALS = {
    "a": ["a"], "o": ["o"], "e": ["ɤ"], "i": ["i"], "u": ["u"], "ü": ["y"],
    "er": ["ɚ"],
    "ai": ["a", "i"], "ei": ["e", "i"], "ao": ["a", "u"], "ou": ["o", "u"],
    "an": ["a", "n"], "en": ["ə", "n"], "ang": ["ɑ", "ŋ"], "eng": ["ə", "ŋ"],
    "ong": ["ʊ", "ŋ"],
    "ia": ["j", "a"], "ie": ["j", "ɛ"], "iao": ["j", "a", "u"], "iu": ["j", "o", "u"],
    "ian": ["j", "ɛ", "n"], "in": ["i", "n"], "iang": ["j", "ɑ", "ŋ"],
    "ing": ["i", "ŋ"], "iong": ["j", "ʊ", "ŋ"],
    "ua": ["w", "a"], "uo": ["w", "o"], "uai": ["w", "a", "i"], "ui": ["w", "e", "i"],
    "uan": ["w", "a", "n"], "un": ["w", "ə", "n"], "uang": ["w", "ɑ", "ŋ"],
    "üe": ["ɥ", "ɛ"], "üan": ["ɥ", "ɛ", "n"], "ün": ["y", "n"],
}

ZERO_INITIAL = {
    "yi": ["i"], "ya": ["j", "a"], "ye": ["j", "ɛ"], "yao": ["j", "a", "u"],
    "you": ["j", "o", "u"], "yan": ["j", "ɛ", "n"], "yin": ["i", "n"],
    "yang": ["j", "ɑ", "ŋ"], "ying": ["i", "ŋ"], "yong": ["j", "ʊ", "ŋ"],
    "yu": ["y"], "yue": ["ɥ", "ɛ"], "yuan": ["ɥ", "ɛ", "n"], "yun": ["y", "n"],
    "wu": ["u"], "wa": ["w", "a"], "wo": ["w", "o"], "wai": ["w", "a", "i"],
    "wei": ["w", "e", "i"], "wan": ["w", "a", "n"], "wen": ["w", "ə", "n"],
    "wang": ["w", "ɑ", "ŋ"], "weng": ["w", "ə", "ŋ"],
}


def syllable_to_ipa(syl):
    syl = syl.replace("v", "ü")
    if syl in ZERO_INITIAL:
        return ZERO_INITIAL[syl]
    for ini in ("zh", "ch", "sh"):
        if syl.startswith(ini):
            initial, final = ini, syl[2:]
            break
    else:
        if syl[0] in INITIALS:
            initial, final = syl[0], syl[1:]
        else:
            initial, final = "", syl
    head = INITIALS.get(initial, [])
    if initial in ("j", "q", "x") and final.startswith("u"):
        final = "ü" + final[1:]
    if final == "i" and initial in ("z", "c", "s"):
        return head + ["ɹ̩"]
    if final == "i" and initial in ("zh", "ch", "sh", "r"):
        return head + ["ɻ̩"]
    if final not in FINALS:
        raise KeyError(f"unparsed pinyin syllable {syl!r}")
    return head + FINALS[final]


def strip_tones(s):
    marks = {"̀", "́", "̄", "̌"}
    nfd = unicodedata.normalize("NFD", s)
    return unicodedata.normalize("NFC", "".join(c for c in nfd if c not in marks))


def english():
    words = open(os.path.join(HERE, "lrw_words.txt")).read().split()
    assert len(words) == 500 and len(set(words)) == 500
    d = cmudict.dict()
    with open(os.path.join(DATA, "lrw_words.txt"), "w") as wl, \
            open(os.path.join(DATA, "lexicon_en.txt"), "w") as lx:
        wl.write("# English word classes, <word> <sample_count>\n")
        lx.write("# English lexicon, <word> <ipa-phoneme>...\n")
        for w in words:
            wl.write(f"{w} {EN_SAMPLES}\n")
            ipa = arpa_to_ipa(d[w.lower()][0])
            lx.write(unicodedata.normalize("NFC", f"{w} {' '.join(ipa)}") + "\n")


def mandarin():
    path = os.path.join(os.path.dirname(jieba.__file__), "dict.txt")
    entries = []
    for line in open(path, encoding="utf-8"):
        word, freq, _tag = line.split()
        if 2 <= len(word) <= 4 and all("一" <= ch <= "鿿" for ch in word):
            entries.append((int(freq), word))
    entries.sort(key=lambda e: (-e[0], e[1]))

    seen = set()
    chosen = []
    for _freq, word in entries:
        toned = pypinyin.lazy_pinyin(word, style=pypinyin.Style.TONE)
        plain = pypinyin.lazy_pinyin(word, style=pypinyin.Style.NORMAL, v_to_u=True)
        key = "_".join(plain).upper()
        if key in seen or strip_tones("_".join(toned)).upper() != key:
            continue
        try:
            ipa = [seg for syl in plain for seg in syllable_to_ipa(syl)]
        except KeyError:
            continue
        seen.add(key)
        chosen.append(("_".join(toned), key, ipa))
        if len(chosen) == CMN_WORDS:
            break
    assert len(chosen) == CMN_WORDS

    with open(os.path.join(DATA, "lrw1000_words.txt"), "w") as wl, \
            open(os.path.join(DATA, "lexicon_cmn.txt"), "w") as lx:
        wl.write("# Mandarin word classes (tone-marked pinyin), <word> <sample_count>\n")
        lx.write("# Mandarin lexicon keyed by toneless pinyin, <word> <ipa-phoneme>...\n")
        for toned, key, ipa in chosen:
            wl.write(unicodedata.normalize("NFC", f"{toned} {CMN_SAMPLES}") + "\n")
            lx.write(unicodedata.normalize("NFC", f"{key} {' '.join(ipa)}") + "\n")


if __name__ == "__main__":
    english()
    mandarin()
