#include "fcvi/schema.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fcvi {

using nlohmann::json;

std::size_t FilterSchema::encoded_dim() const {
    std::size_t m = 0;
    for (const auto& a : attributes) m += a.width();
    return m;
}

std::size_t FilterSchema::offset_of(std::size_t attr_index) const {
    std::size_t off = 0;
    for (std::size_t i = 0; i < attr_index; ++i) off += attributes[i].width();
    return off;
}

std::size_t FilterSchema::find(const std::string& name) const {
    for (std::size_t i = 0; i < attributes.size(); ++i)
        if (attributes[i].name == name) return i;
    throw std::invalid_argument("unknown attribute: " + name);
}

std::size_t FilterSchema::category_index(std::size_t attr_index, const std::string& value) const {
    const auto& a = attributes[attr_index];
    auto it = std::find(a.categories.begin(), a.categories.end(), value);
    if (it == a.categories.end())
        throw std::invalid_argument("unknown category '" + value + "' for attribute " + a.name);
    return std::size_t(it - a.categories.begin());
}

void FilterSchema::validate() const {
    if (attributes.empty()) throw std::invalid_argument("schema has no attributes");
    std::set<std::string> names;
    for (const auto& a : attributes) {
        if (a.name.empty()) throw std::invalid_argument("attribute with empty name");
        if (!names.insert(a.name).second)
            throw std::invalid_argument("duplicate attribute name: " + a.name);
        if (a.kind == AttrKind::categorical) {
            if (a.categories.empty())
                throw std::invalid_argument("categorical attribute " + a.name + " has no categories");
            std::set<std::string> cats(a.categories.begin(), a.categories.end());
            if (cats.size() != a.categories.size())
                throw std::invalid_argument("duplicate categories in attribute " + a.name);
        }
    }
}

std::string FilterSchema::to_json_string(int indent) const {
    json arr = json::array();
    for (const auto& a : attributes) {
        json j;
        j["name"] = a.name;
        j["kind"] = a.kind == AttrKind::numeric ? "numeric" : "categorical";
        if (a.kind == AttrKind::categorical) {
            j["categories"] = a.categories;
        } else {
            j["range_lo"] = a.range_lo;
            j["range_hi"] = a.range_hi;
        }
        arr.push_back(j);
    }
    json root;
    root["attributes"] = arr;
    return root.dump(indent);
}

FilterSchema FilterSchema::from_json_string(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("schema JSON parse error: ") + e.what());
    }
    FilterSchema s;
    for (const auto& j : root.at("attributes")) {
        AttributeSpec a;
        a.name = j.at("name").get<std::string>();
        std::string kind = j.at("kind").get<std::string>();
        if (kind == "numeric") {
            a.kind = AttrKind::numeric;
            a.range_lo = j.value("range_lo", 0.0);
            a.range_hi = j.value("range_hi", 0.0);
        } else if (kind == "categorical") {
            a.kind = AttrKind::categorical;
            a.categories = j.at("categories").get<std::vector<std::string>>();
        } else {
            throw std::invalid_argument("unknown attribute kind: " + kind);
        }
        s.attributes.push_back(std::move(a));
    }
    s.validate();
    return s;
}

bool QueryFilter::has_expanding_predicate(std::size_t probes) const {
    for (const auto& p : predicates) {
        if (std::holds_alternative<RangePredicate>(p)) {
            const auto& r = std::get<RangePredicate>(p);
            if (probes > 1 && r.hi > r.lo) return true;
        } else if (std::holds_alternative<OneOfPredicate>(p)) {
            if (std::get<OneOfPredicate>(p).values.size() > 1) return true;
        }
    }
    return false;
}

void QueryFilter::validate(const FilterSchema& schema) const {
    if (predicates.empty()) throw std::invalid_argument("empty predicate set");
    for (const auto& p : predicates) {
        if (std::holds_alternative<ExactPredicate>(p)) {
            const auto& e = std::get<ExactPredicate>(p);
            std::size_t ai = schema.find(e.attr);
            const auto& a = schema.attributes[ai];
            if (a.kind == AttrKind::categorical) {
                if (!std::holds_alternative<std::string>(e.value))
                    throw std::invalid_argument("attribute " + e.attr + " expects a category value");
                schema.category_index(ai, std::get<std::string>(e.value));
            } else if (!std::holds_alternative<double>(e.value)) {
                throw std::invalid_argument("attribute " + e.attr + " expects a numeric value");
            }
        } else if (std::holds_alternative<RangePredicate>(p)) {
            const auto& r = std::get<RangePredicate>(p);
            std::size_t ai = schema.find(r.attr);
            if (schema.attributes[ai].kind != AttrKind::numeric)
                throw std::invalid_argument("range predicate on non-numeric attribute " + r.attr);
            if (r.lo > r.hi)
                throw std::invalid_argument("range predicate on " + r.attr + " has lo > hi");
        } else {
            const auto& o = std::get<OneOfPredicate>(p);
            if (o.values.empty())
                throw std::invalid_argument("one-of predicate on " + o.attr + " has no values");
            std::size_t ai = schema.find(o.attr);
            const auto& a = schema.attributes[ai];
            for (const auto& v : o.values) {
                if (a.kind == AttrKind::categorical) {
                    if (!std::holds_alternative<std::string>(v))
                        throw std::invalid_argument("attribute " + o.attr + " expects category values");
                    schema.category_index(ai, std::get<std::string>(v));
                } else if (!std::holds_alternative<double>(v)) {
                    throw std::invalid_argument("attribute " + o.attr + " expects numeric values");
                }
            }
        }
    }
}

namespace {

bool value_matches(const FilterSchema& schema, std::size_t ai, std::span<const float> enc,
                   const AttrValue& want) {
    const auto& a = schema.attributes[ai];
    std::size_t off = schema.offset_of(ai);
    if (a.kind == AttrKind::numeric) {
        return double(enc[off]) == std::get<double>(want);
    }
    std::size_t ci = schema.category_index(ai, std::get<std::string>(want));
    return enc[off + ci] == 1.0f;
}

}  // namespace

bool QueryFilter::matches(const FilterSchema& schema, std::span<const float> enc) const {
    for (const auto& p : predicates) {
        if (std::holds_alternative<ExactPredicate>(p)) {
            const auto& e = std::get<ExactPredicate>(p);
            if (!value_matches(schema, schema.find(e.attr), enc, e.value)) return false;
        } else if (std::holds_alternative<RangePredicate>(p)) {
            const auto& r = std::get<RangePredicate>(p);
            std::size_t ai = schema.find(r.attr);
            double v = double(enc[schema.offset_of(ai)]);
            if (v < r.lo || v > r.hi) return false;
        } else {
            const auto& o = std::get<OneOfPredicate>(p);
            std::size_t ai = schema.find(o.attr);
            bool any = false;
            for (const auto& v : o.values)
                if (value_matches(schema, ai, enc, v)) {
                    any = true;
                    break;
                }
            if (!any) return false;
        }
    }
    return true;
}

namespace {

json attr_value_to_json(const AttrValue& v) {
    if (std::holds_alternative<double>(v)) return std::get<double>(v);
    return std::get<std::string>(v);
}

AttrValue attr_value_from_json(const json& j) {
    if (j.is_number()) return j.get<double>();
    return j.get<std::string>();
}

}  // namespace

std::string QueryFilter::to_json_string() const {
    json arr = json::array();
    for (const auto& p : predicates) {
        json j;
        if (std::holds_alternative<ExactPredicate>(p)) {
            const auto& e = std::get<ExactPredicate>(p);
            j["kind"] = "exact";
            j["attr"] = e.attr;
            j["value"] = attr_value_to_json(e.value);
        } else if (std::holds_alternative<RangePredicate>(p)) {
            const auto& r = std::get<RangePredicate>(p);
            j["kind"] = "range";
            j["attr"] = r.attr;
            j["lo"] = r.lo;
            j["hi"] = r.hi;
        } else {
            const auto& o = std::get<OneOfPredicate>(p);
            j["kind"] = "one_of";
            j["attr"] = o.attr;
            json vals = json::array();
            for (const auto& v : o.values) vals.push_back(attr_value_to_json(v));
            j["values"] = vals;
        }
        arr.push_back(j);
    }
    json root;
    root["predicates"] = arr;
    return root.dump();
}

QueryFilter QueryFilter::from_json_string(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("query filter JSON parse error: ") + e.what());
    }
    QueryFilter qf;
    for (const auto& j : root.at("predicates")) {
        std::string kind = j.at("kind").get<std::string>();
        if (kind == "exact") {
            qf.predicates.push_back(ExactPredicate{j.at("attr"), attr_value_from_json(j.at("value"))});
        } else if (kind == "range") {
            qf.predicates.push_back(RangePredicate{j.at("attr"), j.at("lo"), j.at("hi")});
        } else if (kind == "one_of") {
            OneOfPredicate o;
            o.attr = j.at("attr").get<std::string>();
            for (const auto& v : j.at("values")) o.values.push_back(attr_value_from_json(v));
            qf.predicates.push_back(std::move(o));
        } else {
            throw std::invalid_argument("unknown predicate kind: " + kind);
        }
    }
    return qf;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

// Splits on commas that are not inside a {...} group.
std::vector<std::string> split_predicates(const std::string& expr) {
    std::vector<std::string> parts;
    std::string cur;
    int depth = 0;
    for (char ch : expr) {
        if (ch == '{') ++depth;
        if (ch == '}') --depth;
        if (ch == ',' && depth == 0) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    parts.push_back(cur);
    return parts;
}

double parse_number(const std::string& s, const std::string& context) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw UsageError("cannot parse number '" + s + "' in " + context);
    }
}

AttrValue parse_value(const std::string& s, const AttributeSpec& a) {
    if (a.kind == AttrKind::numeric) return parse_number(s, "predicate on " + a.name);
    return s;
}

}  // namespace

QueryFilter parse_filter_expr(const std::string& expr, const FilterSchema& schema) {
    QueryFilter qf;
    std::string body = trim(expr);
    if (body.empty()) throw UsageError("empty filter expression");
    for (const std::string& raw_part : split_predicates(body)) {
        std::string part = trim(raw_part);
        if (part.empty()) throw UsageError("empty predicate in filter expression");

        // attr in {a,b}
        std::size_t in_pos = part.find(" in ");
        if (in_pos != std::string::npos && part.find('{', in_pos) != std::string::npos) {
            std::string attr = trim(part.substr(0, in_pos));
            std::size_t lb = part.find('{', in_pos);
            std::size_t rb = part.find('}', lb);
            if (rb == std::string::npos) throw UsageError("unterminated { in predicate: " + part);
            std::string inner = part.substr(lb + 1, rb - lb - 1);
            const auto& a = schema.attributes[schema.find(attr)];
            OneOfPredicate o;
            o.attr = attr;
            std::stringstream ss(inner);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                tok = trim(tok);
                if (!tok.empty()) o.values.push_back(parse_value(tok, a));
            }
            if (o.values.empty()) throw UsageError("empty value set in predicate: " + part);
            qf.predicates.push_back(std::move(o));
            continue;
        }

        // attr:lo..hi
        std::size_t colon = part.find(':');
        if (colon != std::string::npos && part.find("..", colon) != std::string::npos) {
            std::string attr = trim(part.substr(0, colon));
            std::string rest = part.substr(colon + 1);
            std::size_t dots = rest.find("..");
            double lo = parse_number(trim(rest.substr(0, dots)), "range on " + attr);
            double hi = parse_number(trim(rest.substr(dots + 2)), "range on " + attr);
            qf.predicates.push_back(RangePredicate{attr, lo, hi});
            continue;
        }

        // attr=value
        std::size_t eq = part.find('=');
        if (eq != std::string::npos) {
            std::string attr = trim(part.substr(0, eq));
            std::string val = trim(part.substr(eq + 1));
            const auto& a = schema.attributes[schema.find(attr)];
            qf.predicates.push_back(ExactPredicate{attr, parse_value(val, a)});
            continue;
        }

        throw UsageError("cannot parse predicate: '" + part + "'");
    }
    qf.validate(schema);
    return qf;
}

}  // namespace fcvi
