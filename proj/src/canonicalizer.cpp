#include "attndrift/canonicalizer.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <unordered_set>

#include "attndrift/csv.hpp"

namespace attndrift {

namespace {

void append_utf8(std::string& out, char32_t cp) {
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

bool is_space(char32_t cp) {
    return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == U'\v' || cp == U'\f' ||
           cp == 0x00A0 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x202F || cp == 0x3000;
}

bool is_digit(char32_t cp) { return cp >= U'0' && cp <= U'9'; }

bool is_letter(char32_t cp) {
    if ((cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z')) return true;
    if (cp >= 0x00C0 && cp <= 0x024F) return cp != 0x00D7 && cp != 0x00F7;
    if (cp >= 0x0370 && cp <= 0x03FF) return cp != 0x037E && cp != 0x0387;  // Greek
    if (cp >= 0x0400 && cp <= 0x04FF) return cp < 0x0482 || cp > 0x0489;    // Cyrillic
    if (cp >= 0x0590 && cp <= 0x06FF) return true;                          // Hebrew, Arabic
    if (cp >= 0x3040 && cp <= 0x9FFF) return true;                          // kana, CJK
    if (cp >= 0xAC00 && cp <= 0xD7A3) return true;                          // Hangul
    return false;
}

char32_t to_lower(char32_t cp) {
    if (cp >= U'A' && cp <= U'Z') return cp + 32;
    if (cp < 0x00C0) return cp;
    if (cp <= 0x00DE && cp != 0x00D7) return cp + 0x20;
    if ((cp >= 0x0100 && cp <= 0x0137) || (cp >= 0x014A && cp <= 0x0177)) return cp | 1;
    if ((cp >= 0x0139 && cp <= 0x0148) || (cp >= 0x0179 && cp <= 0x017E)) {
        return (cp & 1) ? cp + 1 : cp;
    }
    if (cp == 0x0178) return 0x00FF;
    if (cp >= 0x0391 && cp <= 0x03AB && cp != 0x03A2) return cp + 0x20;
    if (cp >= 0x0410 && cp <= 0x042F) return cp + 0x20;
    if (cp >= 0x0400 && cp <= 0x040F) return cp + 0x50;
    return cp;
}

}  // namespace

std::u32string decode_utf8(std::string_view text) {
    std::u32string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        auto b0 = static_cast<unsigned char>(text[i]);
        std::size_t len = 0;
        char32_t cp = 0;
        if (b0 < 0x80) {
            len = 1;
            cp = b0;
        } else if ((b0 & 0xE0) == 0xC0) {
            len = 2;
            cp = b0 & 0x1F;
        } else if ((b0 & 0xF0) == 0xE0) {
            len = 3;
            cp = b0 & 0x0F;
        } else if ((b0 & 0xF8) == 0xF0) {
            len = 4;
            cp = b0 & 0x07;
        } else {
            ++i;  // stray continuation or invalid lead byte
            continue;
        }
        if (i + len > text.size()) break;
        bool ok = true;
        for (std::size_t k = 1; k < len; ++k) {
            auto b = static_cast<unsigned char>(text[i + k]);
            if ((b & 0xC0) != 0x80) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (b & 0x3F);
        }
        if (!ok) {
            ++i;
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::string normalize_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char32_t cp : decode_utf8(text)) {
        if (is_space(cp)) {
            pending_space = !out.empty();
            continue;
        }
        if (!is_digit(cp) && !is_letter(cp)) continue;
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        append_utf8(out, to_lower(cp));
    }
    return out;
}

namespace {

// Offset and length of the last digit run of at most two digits.
std::optional<std::pair<std::size_t, std::size_t>> digit_token_run(std::string_view title_norm) {
    std::optional<std::pair<std::size_t, std::size_t>> run;
    std::size_t i = 0;
    while (i < title_norm.size()) {
        if (title_norm[i] >= '0' && title_norm[i] <= '9') {
            std::size_t j = i;
            while (j < title_norm.size() && title_norm[j] >= '0' && title_norm[j] <= '9') ++j;
            if (j - i <= 2) run = std::pair{i, j - i};
            i = j;
        } else {
            ++i;
        }
    }
    return run;
}

}  // namespace

std::optional<std::string> extract_digit_token(std::string_view title_norm) {
    auto run = digit_token_run(title_norm);
    if (!run) return std::nullopt;
    return std::string(title_norm.substr(run->first, run->second));
}

std::string strip_digit_token(std::string_view title_norm) {
    auto run = digit_token_run(title_norm);
    if (!run) return std::string(title_norm);
    std::string out(title_norm.substr(0, run->first));
    out += title_norm.substr(run->first + run->second);
    // Collapse the space left behind.
    std::string collapsed;
    for (char c : out) {
        if (c == ' ' && (collapsed.empty() || collapsed.back() == ' ')) continue;
        collapsed += c;
    }
    if (!collapsed.empty() && collapsed.back() == ' ') collapsed.pop_back();
    return collapsed;
}

NormalizedText normalize(std::string_view title, std::string_view creator) {
    NormalizedText n;
    n.title_norm = normalize_text(title);
    n.creator_norm = normalize_text(creator);
    n.digit_token = extract_digit_token(n.title_norm);
    n.empty_title = n.title_norm.empty();
    return n;
}

bool digit_tokens_equal(const std::optional<std::string>& a, const std::optional<std::string>& b) {
    auto canon = [](const std::optional<std::string>& t) -> std::string_view {
        if (!t || *t == "1") return {};
        return *t;
    };
    return canon(a) == canon(b);
}

std::size_t bounded_edit_distance(std::u32string_view a, std::u32string_view b, std::size_t limit) {
    if (a.size() > b.size()) std::swap(a, b);
    if (b.size() - a.size() > limit) return limit + 1;
    // Strip common prefix and suffix; they never contribute.
    while (!a.empty() && a.front() == b.front()) {
        a.remove_prefix(1);
        b.remove_prefix(1);
    }
    while (!a.empty() && a.back() == b.back()) {
        a.remove_suffix(1);
        b.remove_suffix(1);
    }
    if (a.empty()) return std::min(b.size(), limit + 1);

    std::vector<std::size_t> row(a.size() + 1);
    std::iota(row.begin(), row.end(), std::size_t{0});
    for (std::size_t j = 1; j <= b.size(); ++j) {
        std::size_t diag = row[0];
        row[0] = j;
        std::size_t row_min = row[0];
        for (std::size_t i = 1; i <= a.size(); ++i) {
            std::size_t up = row[i];
            std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
            row[i] = std::min({row[i] + 1, row[i - 1] + 1, diag + cost});
            diag = up;
            row_min = std::min(row_min, row[i]);
        }
        if (row_min > limit) return limit + 1;
    }
    return std::min(row[a.size()], limit + 1);
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
    auto ua = decode_utf8(a);
    auto ub = decode_utf8(b);
    return bounded_edit_distance(ua, ub, std::max(ua.size(), ub.size()));
}

RawItem make_raw_item(const ItemRecord& record) {
    auto n = normalize(record.title, record.creator);
    return {record.item_key, std::move(n.title_norm), std::move(n.creator_norm), std::move(n.digit_token)};
}

bool raw_item_less(const RawItem& a, const RawItem& b) {
    if (int c = a.title_norm.compare(b.title_norm); c != 0) return c < 0;
    if (int c = a.creator_norm.compare(b.creator_norm); c != 0) return c < 0;
    return a.item_key < b.item_key;
}

std::vector<std::pair<std::size_t, std::size_t>> candidate_pairs(std::span<const RawItem> sorted,
                                                                 const CanonicalizeOptions& options) {
    std::vector<std::u32string> titles;
    std::vector<std::u32string> creators;
    titles.reserve(sorted.size());
    creators.reserve(sorted.size());
    for (const auto& item : sorted) {
        titles.push_back(decode_utf8(strip_digit_token(item.title_norm)));
        creators.push_back(decode_utf8(item.creator_norm));
    }
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const std::size_t end = std::min(sorted.size(), i + options.window + 1);
        for (std::size_t j = i + 1; j < end; ++j) {
            if (!digit_tokens_equal(sorted[i].digit_token, sorted[j].digit_token)) continue;
            if (bounded_edit_distance(titles[i], titles[j], options.max_edit) > options.max_edit) continue;
            if (bounded_edit_distance(creators[i], creators[j], options.max_edit) > options.max_edit) continue;
            pairs.emplace_back(i, j);
        }
    }
    return pairs;
}

namespace {

class DisjointSet {
public:
    explicit DisjointSet(std::size_t n) : parent_(n), size_(n, 1) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> size_;
};

}  // namespace

const std::string* CanonicalCatalog::find(std::string_view item_key) const {
    auto it = index_.find(std::string(item_key));
    if (it == index_.end()) return nullptr;
    return &groups_[it->second].canonical_id;
}

const std::string& CanonicalCatalog::canonical_or_self(const std::string& item_key) const {
    auto it = index_.find(item_key);
    if (it == index_.end()) return item_key;
    return groups_[it->second].canonical_id;
}

std::vector<std::pair<std::string, std::string>> CanonicalCatalog::mapping_sorted() const {
    std::vector<std::pair<std::string, std::string>> rows;
    rows.reserve(index_.size());
    for (const auto& g : groups_) {
        for (const auto& m : g.members) rows.emplace_back(m, g.canonical_id);
    }
    std::sort(rows.begin(), rows.end());
    return rows;
}

void CanonicalCatalog::rebuild_index() {
    std::sort(groups_.begin(), groups_.end(),
              [](const Group& a, const Group& b) { return a.canonical_id < b.canonical_id; });
    index_.clear();
    for (std::size_t g = 0; g < groups_.size(); ++g) {
        for (const auto& m : groups_[g].members) {
            if (!index_.emplace(m, g).second) {
                throw std::invalid_argument("item key '" + m + "' appears in two canonical groups");
            }
        }
    }
}

void CanonicalCatalog::write_csv(std::ostream& out) const {
    out << "item_key,canonical_id\n";
    for (const auto& [key, canon] : mapping_sorted()) {
        out << csv::escape(key) << ',' << csv::escape(canon) << '\n';
    }
}

CanonicalCatalog CanonicalCatalog::read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open catalog '" + path + "'");
    std::string line;
    std::vector<std::string> fields;
    if (!std::getline(in, line) || !csv::split_record(line, fields) || fields.size() < 2 ||
        fields[0] != "item_key" || fields[1] != "canonical_id") {
        throw std::runtime_error("catalog '" + path + "' lacks the item_key,canonical_id header");
    }
    std::unordered_map<std::string, std::size_t> by_canon;
    CanonicalCatalog catalog;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (!csv::split_record(line, fields) || fields.size() < 2 || fields[0].empty() || fields[1].empty()) {
            throw std::runtime_error("catalog '" + path + "' line " + std::to_string(line_no) + " is malformed");
        }
        auto [it, inserted] = by_canon.emplace(fields[1], catalog.groups_.size());
        if (inserted) catalog.groups_.push_back({fields[1], {}});
        catalog.groups_[it->second].members.push_back(fields[0]);
    }
    for (auto& g : catalog.groups_) std::sort(g.members.begin(), g.members.end());
    catalog.rebuild_index();
    return catalog;
}

CanonicalCatalog build_catalog(std::span<const std::string> item_keys,
                               std::span<const std::pair<std::size_t, std::size_t>> pairs) {
    DisjointSet sets(item_keys.size());
    for (const auto& [a, b] : pairs) {
        if (a >= item_keys.size() || b >= item_keys.size()) {
            throw std::out_of_range("pair references an unknown item");
        }
        sets.unite(a, b);
    }
    std::unordered_map<std::size_t, std::size_t> root_to_group;
    CanonicalCatalog catalog;
    for (std::size_t i = 0; i < item_keys.size(); ++i) {
        auto [it, inserted] = root_to_group.emplace(sets.find(i), catalog.groups_.size());
        if (inserted) catalog.groups_.emplace_back();
        catalog.groups_[it->second].members.push_back(item_keys[i]);
    }
    for (auto& g : catalog.groups_) {
        std::sort(g.members.begin(), g.members.end());
        g.members.erase(std::unique(g.members.begin(), g.members.end()), g.members.end());
        g.canonical_id = g.members.front();
    }
    catalog.rebuild_index();
    return catalog;
}

CanonicalCatalog canonicalize(std::span<const ItemRecord> records, const CanonicalizeOptions& options,
                              CanonicalizeStats* stats) {
    CanonicalizeStats local;
    std::vector<std::string> keys;
    std::vector<RawItem> items;
    std::unordered_set<std::string> seen;
    for (const auto& r : records) {
        if (!seen.insert(r.item_key).second) continue;
        keys.push_back(r.item_key);
        items.push_back(make_raw_item(r));
        if (items.back().title_norm.empty()) ++local.empty_titles;
    }
    local.raw_items = keys.size();

    // Indices sorted by the canonical row order; identical normalized rows
    // become one distinct row whose first member represents it.
    std::vector<std::size_t> order(items.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return raw_item_less(items[a], items[b]); });

    std::vector<RawItem> distinct;
    std::vector<std::size_t> representative;  // distinct row -> key index
    std::vector<std::pair<std::size_t, std::size_t>> key_pairs;
    for (std::size_t idx : order) {
        const RawItem& item = items[idx];
        if (!distinct.empty() && distinct.back().title_norm == item.title_norm &&
            distinct.back().creator_norm == item.creator_norm) {
            key_pairs.emplace_back(representative.back(), idx);
            continue;
        }
        distinct.push_back(item);
        representative.push_back(idx);
    }
    local.distinct_rows = distinct.size();

    auto row_pairs = candidate_pairs(distinct, options);
    local.pairs = row_pairs.size();
    for (const auto& [a, b] : row_pairs) key_pairs.emplace_back(representative[a], representative[b]);

    auto catalog = build_catalog(keys, key_pairs);
    local.canonical_items = catalog.canonical_size();
    if (stats) *stats = local;
    return catalog;
}

std::vector<ItemRecord> read_item_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open item table '" + path + "'");
    std::string line;
    std::vector<std::string> fields;
    if (!std::getline(in, line) || !csv::split_record(line, fields)) {
        throw std::runtime_error("item table '" + path + "' has no header");
    }
    int key_col = -1, title_col = -1, creator_col = -1;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] == "item_key") key_col = static_cast<int>(i);
        if (fields[i] == "title") title_col = static_cast<int>(i);
        if (fields[i] == "creator") creator_col = static_cast<int>(i);
    }
    if (key_col < 0 || title_col < 0) {
        throw std::runtime_error("item table '" + path + "' needs item_key and title columns");
    }
    std::vector<ItemRecord> records;
    std::unordered_set<std::string> seen;
    auto get = [&](int c) -> std::string {
        return c >= 0 && static_cast<std::size_t>(c) < fields.size() ? fields[static_cast<std::size_t>(c)] : "";
    };
    while (std::getline(in, line)) {
        if (line.empty() || !csv::split_record(line, fields)) continue;
        auto key = get(key_col);
        if (key.empty() || !seen.insert(key).second) continue;
        records.push_back({key, get(title_col), get(creator_col)});
    }
    return records;
}

}  // namespace attndrift
