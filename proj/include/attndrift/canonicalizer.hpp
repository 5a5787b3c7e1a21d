#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace attndrift {

// Title/creator after normalization: lowercase letters, ASCII digits and
// single interior spaces only.
struct NormalizedText {
    std::string title_norm;
    std::string creator_norm;
    // Last maximal digit run of length <= 2 in the normalized title.
    std::optional<std::string> digit_token;
    bool empty_title = false;
};

// Lowercases, drops every character that is not a letter, digit or space and
// collapses whitespace.
std::string normalize_text(std::string_view text);
NormalizedText normalize(std::string_view title, std::string_view creator);
std::optional<std::string> extract_digit_token(std::string_view title_norm);
// The title without the run extract_digit_token reads; titles are compared in
// this form, so versions are told apart by their tokens alone.
std::string strip_digit_token(std::string_view title_norm);

// Absent and "1" denote the same edition.
bool digit_tokens_equal(const std::optional<std::string>& a, const std::optional<std::string>& b);

// Unit-cost Levenshtein distance over Unicode code points.
std::size_t edit_distance(std::string_view a, std::string_view b);
// Same, but stops early: returns min(distance, limit + 1).
std::size_t bounded_edit_distance(std::u32string_view a, std::u32string_view b, std::size_t limit);
std::u32string decode_utf8(std::string_view text);

struct RawItem {
    std::string item_key;
    std::string title_norm;
    std::string creator_norm;
    std::optional<std::string> digit_token;
};

struct ItemRecord {
    std::string item_key;
    std::string title;
    std::string creator;
};

RawItem make_raw_item(const ItemRecord& record);

struct CanonicalizeOptions {
    std::size_t window = 10;
    std::size_t max_edit = 1;
};

// Sort order expected by candidate_pairs: (title_norm, creator_norm), then item_key.
bool raw_item_less(const RawItem& a, const RawItem& b);

// Pairs (i, j), i < j <= i + window, of sorted items whose titles (digit
// token stripped) and creators are each within max_edit edits and whose digit
// tokens agree.
std::vector<std::pair<std::size_t, std::size_t>> candidate_pairs(std::span<const RawItem> sorted,
                                                                 const CanonicalizeOptions& options = {});

class CanonicalCatalog {
public:
    struct Group {
        std::string canonical_id;
        std::vector<std::string> members;  // sorted
    };

    CanonicalCatalog() = default;

    // Canonical id of a raw key, or nullptr when the key is unknown.
    const std::string* find(std::string_view item_key) const;
    // Canonical id, falling back to the raw key itself.
    const std::string& canonical_or_self(const std::string& item_key) const;

    const std::vector<Group>& groups() const { return groups_; }
    std::size_t raw_size() const { return index_.size(); }
    std::size_t canonical_size() const { return groups_.size(); }

    // item_key,canonical_id rows sorted by item_key.
    void write_csv(std::ostream& out) const;
    static CanonicalCatalog read_csv(const std::string& path);

    friend CanonicalCatalog build_catalog(std::span<const std::string>,
                                          std::span<const std::pair<std::size_t, std::size_t>>);
    friend bool operator==(const CanonicalCatalog& a, const CanonicalCatalog& b) {
        return a.mapping_sorted() == b.mapping_sorted();
    }

private:
    std::vector<std::pair<std::string, std::string>> mapping_sorted() const;
    void rebuild_index();

    std::vector<Group> groups_;  // sorted by canonical_id
    std::unordered_map<std::string, std::size_t> index_;  // item_key -> group
};

// Disjoint-set closure of `pairs` (indices into `item_keys`). Each group's
// canonical id is its lexicographically smallest key.
CanonicalCatalog build_catalog(std::span<const std::string> item_keys,
                               std::span<const std::pair<std::size_t, std::size_t>> pairs);

struct CanonicalizeStats {
    std::size_t raw_items = 0;
    std::size_t distinct_rows = 0;
    std::size_t pairs = 0;
    std::size_t empty_titles = 0;
    std::size_t canonical_items = 0;
};

// Full heuristic: normalize, collapse identical (title, creator) rows, sort,
// pair within the forward window, close transitively.
CanonicalCatalog canonicalize(std::span<const ItemRecord> records, const CanonicalizeOptions& options = {},
                              CanonicalizeStats* stats = nullptr);

// item_key,title,creator table, first occurrence of a key wins.
std::vector<ItemRecord> read_item_table(const std::string& path);

}  // namespace attndrift
