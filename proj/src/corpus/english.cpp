#include <cctype>
#include <string>
#include <unordered_set>

#include "temsa/corpus.hpp"

namespace temsa::corpus {

namespace {

// Function words plus a few hundred high-frequency content words.
constexpr std::string_view kLexicon =
    "a about above after again against all am an and any are aren't as at be because been before being "
    "below between both but by can can't cannot could couldn't did didn't do does doesn't doing don't down "
    "during each few for from further had hadn't has hasn't have haven't having he he'd he'll he's her here "
    "here's hers herself him himself his how how's i i'd i'll i'm i've if in into is isn't it it's its "
    "itself let's me more most mustn't my myself no nor not of off on once only or other ought our ours "
    "ourselves out over own same shan't she she'd she'll she's should shouldn't so some such than that "
    "that's the their theirs them themselves then there there's these they they'd they'll they're they've "
    "this those through to too under until up very was wasn't we we'd we'll we're we've were weren't what "
    "what's when when's where where's which while who who's whom why why's will with won't would wouldn't "
    "you you'd you'll you're you've your yours yourself yourselves im dont cant wont thats just also now "
    "new good great best better love like get got go going gone come came make made know think see look "
    "want need feel day days time year years today tonight tomorrow yesterday week night morning people "
    "person man men woman women child children kid kids baby boy girl friend friends family mother father "
    "mom dad son daughter brother sister home house world life live living work job way thing things place "
    "city country state government police news report story water food dog cat tree sky sun beautiful "
    "happy sad bad free big small little long old young high right left first last next never always ever "
    "every many much one two three four five six seven eight nine ten hundred thousand million "
    "together belong belongs believe help stop start end keep give take say said tell told ask call "
    "thank thanks please sorry yes yeah hey hello welcome back again still even well really here there "
    "war peace fight kill killed death dead hate angry fear hope dream heart soul god church school team "
    "game play player win won lost lose watch read write book music song show movie film photo picture "
    "beach sea island trip travel list bucket summer winter spring fall weather rain snow wind fire "
    "street road car bus train plane money pay buy sell business market president election vote "
    "law court right rights human black white red blue green strong power support protest against united "
    "america american nation national public social media online post share follow video amazing awesome "
    "nice cool funny wow lol omg true real fake news happy birthday party wedding dinner lunch breakfast "
    "coffee tea drink eat food hungry tired sick health doctor hospital care safe danger dangerous "
    "because something nothing everything anything someone everyone anyone nobody proud perfect done";

const std::unordered_set<std::string>& lexicon() {
    static const std::unordered_set<std::string> words = [] {
        std::unordered_set<std::string> out;
        std::size_t pos = 0;
        while (pos < kLexicon.size()) {
            auto end = kLexicon.find(' ', pos);
            if (end == std::string_view::npos) end = kLexicon.size();
            if (end > pos) out.emplace(kLexicon.substr(pos, end - pos));
            pos = end + 1;
        }
        return out;
    }();
    return words;
}

bool known(const std::string& w) {
    const auto& lex = lexicon();
    if (lex.count(w)) return true;
    auto try_strip = [&](std::string_view suffix, std::string_view replacement) {
        if (w.size() < suffix.size() + 3 || w.compare(w.size() - suffix.size(), suffix.size(), suffix) != 0)
            return false;
        std::string stem = w.substr(0, w.size() - suffix.size());
        stem += replacement;
        return lex.count(stem) > 0;
    };
    return try_strip("'s", "") || try_strip("ies", "y") || try_strip("es", "") || try_strip("s", "") ||
           try_strip("ed", "") || try_strip("ing", "") || try_strip("ly", "");
}

}  // namespace

double EnglishHeuristic::coverage(std::string_view text) {
    std::size_t words = 0;
    std::size_t hits = 0;
    std::string word;
    auto flush = [&] {
        // Trim leading/trailing apostrophes.
        while (!word.empty() && word.back() == '\'') word.pop_back();
        std::size_t lead = 0;
        while (lead < word.size() && word[lead] == '\'') ++lead;
        word.erase(0, lead);
        if (!word.empty()) {
            ++words;
            if (known(word)) ++hits;
        }
        word.clear();
    };
    for (unsigned char c : text) {
        if (c < 0x80 && (std::isalpha(c) || c == '\'')) {
            word.push_back(static_cast<char>(std::tolower(c)));
        } else if (c >= 0x80) {
            // Non-ASCII letters poison the current word so it never matches.
            word.push_back('\x01');
        } else {
            flush();
        }
    }
    flush();
    return words == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(words);
}

bool EnglishHeuristic::operator()(std::string_view text) const {
    std::size_t visible = 0;
    std::size_t ascii = 0;
    for (unsigned char c : text) {
        if (std::isspace(c)) continue;
        ++visible;
        if (c < 0x80) ++ascii;
    }
    if (visible == 0) return false;
    if (static_cast<double>(ascii) / static_cast<double>(visible) < min_ascii_) return false;
    return coverage(text) >= min_coverage_;
}

}  // namespace temsa::corpus
