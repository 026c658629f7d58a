#include "qualit/unicode.hpp"

namespace qualit::unicode {
namespace {

constexpr char32_t kReplacement = 0xFFFD;

bool in(char32_t cp, char32_t lo, char32_t hi) { return cp >= lo && cp <= hi; }

}  // namespace

std::u32string decode(std::string_view utf8) {
    std::u32string out;
    out.reserve(utf8.size());
    std::size_t i = 0;
    while (i < utf8.size()) {
        const auto b0 = static_cast<unsigned char>(utf8[i]);
        int extra = 0;
        char32_t cp = 0;
        if (b0 < 0x80) {
            out.push_back(b0);
            ++i;
            continue;
        } else if ((b0 & 0xE0) == 0xC0) {
            extra = 1;
            cp = b0 & 0x1F;
        } else if ((b0 & 0xF0) == 0xE0) {
            extra = 2;
            cp = b0 & 0x0F;
        } else if ((b0 & 0xF8) == 0xF0) {
            extra = 3;
            cp = b0 & 0x07;
        } else {
            out.push_back(kReplacement);
            ++i;
            continue;
        }
        if (i + extra >= utf8.size()) {
            out.push_back(kReplacement);
            ++i;
            continue;
        }
        bool ok = true;
        for (int k = 1; k <= extra; ++k) {
            const auto b = static_cast<unsigned char>(utf8[i + k]);
            if ((b & 0xC0) != 0x80) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (b & 0x3F);
        }
        const bool overlong = (extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) ||
                              (extra == 3 && cp < 0x10000);
        if (!ok || overlong || cp > 0x10FFFF || in(cp, 0xD800, 0xDFFF)) {
            out.push_back(kReplacement);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += extra + 1;
    }
    return out;
}

std::string encode(std::u32string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char32_t cp : text) {
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
    }
    return out;
}

bool is_letter(char32_t cp) {
    if (cp < 0x80) return in(cp, 'a', 'z') || in(cp, 'A', 'Z');
    if (cp == 0xAA || cp == 0xB5 || cp == 0xBA) return true;
    if (in(cp, 0xC0, 0xFF)) return cp != 0xD7 && cp != 0xF7;
    if (in(cp, 0x100, 0x2AF)) return true;
    if (in(cp, 0x370, 0x3FF)) {
        return cp != 0x375 && cp != 0x37E && cp != 0x384 && cp != 0x385 && cp != 0x387 &&
               cp != 0x3F6 && !in(cp, 0x378, 0x379) && !in(cp, 0x380, 0x383) && cp != 0x38B &&
               cp != 0x38D && cp != 0x3A2;
    }
    if (in(cp, 0x400, 0x481) || in(cp, 0x48A, 0x52F)) return true;
    if (in(cp, 0x531, 0x556) || in(cp, 0x561, 0x587)) return true;
    if (in(cp, 0x5D0, 0x5EA) || in(cp, 0x620, 0x64A)) return true;
    if (in(cp, 0x1E00, 0x1EFF) || in(cp, 0x1F00, 0x1FBC)) return true;
    if (in(cp, 0x3041, 0x3096) || in(cp, 0x309D, 0x309F) || in(cp, 0x30A1, 0x30FA) || in(cp, 0x30FC, 0x30FF)) return true;
    if (in(cp, 0x3400, 0x4DBF) || in(cp, 0x4E00, 0x9FFF) || in(cp, 0xF900, 0xFAFF)) return true;
    if (in(cp, 0xAC00, 0xD7A3)) return true;
    return false;
}

char32_t fold_case(char32_t cp) {
    if (in(cp, 'A', 'Z')) return cp + 32;
    if (cp < 0x80) return cp;
    if (cp == 0xB5) return 0x3BC;
    if (in(cp, 0xC0, 0xDE) && cp != 0xD7) return cp + 32;
    if (in(cp, 0x100, 0x12F) || in(cp, 0x132, 0x137) || in(cp, 0x14A, 0x177)) {
        return (cp % 2 == 0) ? cp + 1 : cp;
    }
    if (in(cp, 0x139, 0x148) || in(cp, 0x179, 0x17E)) return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp == 0x178) return 0xFF;
    if (cp == 0x17F) return 's';
    // Greek
    if (cp == 0x386) return 0x3AC;
    if (in(cp, 0x388, 0x38A)) return cp + 37;
    if (cp == 0x38C) return 0x3CC;
    if (in(cp, 0x38E, 0x38F)) return cp + 63;
    if (in(cp, 0x391, 0x3AB) && cp != 0x3A2) return cp + 32;
    if (cp == 0x3C2) return 0x3C3;
    // Cyrillic
    if (in(cp, 0x400, 0x40F)) return cp + 80;
    if (in(cp, 0x410, 0x42F)) return cp + 32;
    if (in(cp, 0x460, 0x481) || in(cp, 0x48A, 0x4BF) || in(cp, 0x4D0, 0x52F)) {
        return (cp % 2 == 0) ? cp + 1 : cp;
    }
    if (cp == 0x4C0) return 0x4CF;
    if (in(cp, 0x4C1, 0x4CE)) return (cp % 2 == 1) ? cp + 1 : cp;
    // Armenian
    if (in(cp, 0x531, 0x556)) return cp + 48;
    // Latin Extended Additional
    if (cp == 0x1E9E) return 0xDF;
    if (in(cp, 0x1E00, 0x1E95) || in(cp, 0x1EA0, 0x1EFF)) return (cp % 2 == 0) ? cp + 1 : cp;
    return cp;
}

std::string to_lower(std::string_view utf8) {
    std::u32string cps = decode(utf8);
    for (char32_t& cp : cps) cp = fold_case(cp);
    return encode(cps);
}

std::vector<std::string> letter_tokens(std::string_view utf8) {
    std::vector<std::string> out;
    std::u32string current;
    for (char32_t cp : decode(utf8)) {
        cp = fold_case(cp);
        if (is_letter(cp)) {
            current.push_back(cp);
        } else if (!current.empty()) {
            out.push_back(encode(current));
            current.clear();
        }
    }
    if (!current.empty()) out.push_back(encode(current));
    return out;
}

std::string normalize_phrase(std::string_view utf8) {
    const std::string lowered = to_lower(utf8);
    std::string out;
    bool pending_space = false;
    for (char c : lowered) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

std::size_t length(std::string_view utf8) {
    std::size_t n = 0;
    for (char c : utf8) {
        if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
    }
    return n;
}

}  // namespace qualit::unicode
