#pragma once

// Tokenization and stemming shared by the n-gram and alignment metrics.
//
// Default tokenization: lowercase, split at whitespace and punctuation,
// punctuation discarded. Bytes >= 0x80 are treated as word characters so
// UTF-8 sequences (accented words, emoji) survive as tokens instead of
// being silently dropped.
//
// Stemmer rule table (applied top to bottom, first hit per stage wins).
// Stage 1 (plurals):        sses -> ss | ies -> y | ss -> ss | s -> ""
// Stage 2 (verb endings):   ing -> "" | ed -> ""
// Stage 3 (adverb ending):  ly -> ""
// A rule fires only when at least 3 characters would remain afterwards;
// a matched rule that cannot fire still ends its stage. The table is
// deliberately small so independent implementations can agree on it.

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace pforge {

struct TokenizerOptions {
    bool lowercase = true;
    // When false, runs of punctuation become their own tokens instead of
    // being dropped.
    bool drop_punctuation = true;
};

inline bool is_word_char(unsigned char c) {
    return std::isalnum(c) != 0 || c >= 0x80;
}

inline std::vector<std::string> tokenize(std::string_view text,
                                         const TokenizerOptions& opt = {}) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            tokens.push_back(current);
            current.clear();
        }
    };
    for (unsigned char c : text) {
        if (is_word_char(c)) {
            current.push_back(opt.lowercase && c < 0x80
                                  ? static_cast<char>(std::tolower(c))
                                  : static_cast<char>(c));
        } else {
            flush();
            if (!opt.drop_punctuation && !std::isspace(c)) {
                tokens.push_back(std::string(1, static_cast<char>(c)));
            }
        }
    }
    flush();
    return tokens;
}

inline std::string stem(std::string_view word) {
    std::string w(word);
    auto ends_with = [&](std::string_view suffix) {
        return w.size() >= suffix.size() &&
               std::string_view(w).substr(w.size() - suffix.size()) == suffix;
    };
    // net_strip = characters the rule removes overall.
    auto fires = [&](size_t net_strip) { return w.size() >= net_strip + 3; };

    // Stage 1: plurals.
    if (ends_with("sses")) {
        if (fires(2)) w.erase(w.size() - 2);
    } else if (ends_with("ies")) {
        if (fires(2)) {
            w.erase(w.size() - 3);
            w.push_back('y');
        }
    } else if (ends_with("ss")) {
        // keep
    } else if (ends_with("s")) {
        if (fires(1)) w.pop_back();
    }
    // Stage 2: verb endings.
    if (ends_with("ing")) {
        if (fires(3)) w.erase(w.size() - 3);
    } else if (ends_with("ed")) {
        if (fires(2)) w.erase(w.size() - 2);
    }
    // Stage 3: adverb ending.
    if (ends_with("ly")) {
        if (fires(2)) w.erase(w.size() - 2);
    }
    return w;
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

inline std::string trim(std::string_view s) {
    size_t begin = 0;
    size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return std::string(s.substr(begin, end - begin));
}

}  // namespace pforge
