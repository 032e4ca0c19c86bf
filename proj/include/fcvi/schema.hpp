#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fcvi/core.hpp"

namespace fcvi {

enum class AttrKind { numeric, categorical };

/// One filter attribute: a scalar slot (numeric) or a one-hot block (categorical).
struct AttributeSpec {
    std::string name;
    AttrKind kind = AttrKind::numeric;
    std::vector<std::string> categories;  // categorical only
    double range_lo = 0.0;                // numeric only
    double range_hi = 0.0;

    std::size_t width() const { return kind == AttrKind::numeric ? 1 : categories.size(); }
};

/// Ordered attribute descriptors; encoded filter dimension m is the sum of widths.
struct FilterSchema {
    std::vector<AttributeSpec> attributes;

    std::size_t encoded_dim() const;

    /// Slot offset of an attribute's block within the encoded vector.
    std::size_t offset_of(std::size_t attr_index) const;

    /// Index into attributes, or error if the name is unknown.
    std::size_t find(const std::string& name) const;

    /// Index of a category within a categorical attribute.
    std::size_t category_index(std::size_t attr_index, const std::string& value) const;

    void validate() const;

    std::string to_json_string(int indent = -1) const;
    static FilterSchema from_json_string(const std::string& text);
};

/// Raw attribute value: a number for numeric attributes, a category name otherwise.
using AttrValue = std::variant<double, std::string>;
using RawAttributes = std::map<std::string, AttrValue>;

struct ExactPredicate {
    std::string attr;
    AttrValue value;
};

struct RangePredicate {
    std::string attr;
    double lo = 0.0;
    double hi = 0.0;
};

struct OneOfPredicate {
    std::string attr;
    std::vector<AttrValue> values;
};

using Predicate = std::variant<ExactPredicate, RangePredicate, OneOfPredicate>;

/// Conjunction of predicates over schema attributes.
struct QueryFilter {
    std::vector<Predicate> predicates;

    bool empty() const { return predicates.empty(); }

    /// True if any predicate expands to more than one probe value.
    bool has_expanding_predicate(std::size_t probes) const;

    void validate(const FilterSchema& schema) const;

    /// True if the encoded record filter row satisfies every predicate (crisp semantics,
    /// numeric ranges inclusive).
    bool matches(const FilterSchema& schema, std::span<const float> encoded_filter) const;

    std::string to_json_string() const;
    static QueryFilter from_json_string(const std::string& text);
};

/// Parses the CLI filter mini-language: `attr=value`, `attr:lo..hi`, `attr in {a,b}`,
/// joined by commas (conjunction). Example: "price:50..100,cat=b".
QueryFilter parse_filter_expr(const std::string& expr, const FilterSchema& schema);

}  // namespace fcvi
