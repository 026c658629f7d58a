#include "qualit/corpus.hpp"

namespace qualit::corpus {
namespace {

bool ends_with(std::string_view w, std::string_view suffix) {
    return w.size() >= suffix.size() && w.substr(w.size() - suffix.size()) == suffix;
}

}  // namespace

std::string stem(std::string_view word) {
    std::string w(word);
    if (ends_with(w, "ies") && !ends_with(w, "eies") && !ends_with(w, "aies")) {
        w.replace(w.size() - 3, 3, "y");
    } else if (ends_with(w, "es") && !ends_with(w, "aes") && !ends_with(w, "ees") &&
               !ends_with(w, "oes")) {
        w.pop_back();
    } else if (ends_with(w, "s") && !ends_with(w, "us") && !ends_with(w, "ss") && !ends_with(w, "is")) {
        w.pop_back();
    }
    // Every branch leaves a word that no longer ends in a strippable "s".
    return w;
}

}  // namespace qualit::corpus
