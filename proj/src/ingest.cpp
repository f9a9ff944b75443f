#include "pricepanel/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "pricepanel/csv.hpp"
#include "pricepanel/format.hpp"

namespace pricepanel {

namespace {

const std::vector<std::string>& columns_of(TableKind kind) {
  static const std::vector<std::string> products = {"prod_id", "name",
                                                    "born_ts"};
  static const std::vector<std::string> offers = {"offer_id", "prod_id",
                                                  "ret_id", "ts", "price"};
  static const std::vector<std::string> clicks = {"prod_id", "ret_id", "ts",
                                                  "clicks"};
  static const std::vector<std::string> retailers = {"ret_id", "ret_name",
                                                     "ts"};
  switch (kind) {
    case TableKind::products: return products;
    case TableKind::offers: return offers;
    case TableKind::clicks: return clicks;
    case TableKind::retailers: return retailers;
  }
  return products;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    return std::nullopt;
  }
  return v;
}

// Raw row: fields in schema order plus source bookkeeping.
struct RawRow {
  std::size_t line = 0;
  std::string raw;
  std::vector<std::string> fields;
  std::string error;  // non-empty: structural problem with the row itself
};

std::vector<RawRow> read_rows(const std::filesystem::path& path,
                              TableKind kind) {
  if (!std::filesystem::exists(path)) {
    throw std::runtime_error("missing file: " + path.string());
  }
  const auto& cols = columns_of(kind);
  std::vector<RawRow> rows;
  const bool jsonl = path.extension() == ".jsonl";
  const auto lines = csv::read_lines(path);
  if (jsonl) {
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      RawRow row{i + 1, lines[i], {}, {}};
      nlohmann::json obj = nlohmann::json::parse(lines[i], nullptr, false);
      if (!obj.is_object()) {
        row.error = "unparseable json";
        rows.push_back(std::move(row));
        continue;
      }
      for (const auto& col : cols) {
        if (!obj.contains(col)) {
          row.error = "missing field: " + col;
          break;
        }
        const auto& v = obj.at(col);
        if (v.is_string()) {
          row.fields.push_back(v.get<std::string>());
        } else if (v.is_number_integer()) {
          row.fields.push_back(std::to_string(v.get<std::int64_t>()));
        } else if (v.is_number_unsigned()) {
          row.fields.push_back(std::to_string(v.get<std::uint64_t>()));
        } else if (v.is_number_float()) {
          row.fields.push_back(format_double(v.get<double>()));
        } else {
          row.error = "bad field type: " + col;
          break;
        }
      }
      rows.push_back(std::move(row));
    }
    return rows;
  }
  // CSV: first line is the header and must match the schema exactly.
  if (lines.empty()) {
    throw std::runtime_error("header mismatch: empty file " + path.string());
  }
  const auto header = csv::parse_row(lines[0]);
  if (!header || *header != cols) {
    throw std::runtime_error("header mismatch: expected '" +
                             table_header(kind) + "' in " + path.string());
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    RawRow row{i + 1, lines[i], {}, {}};
    auto fields = csv::parse_row(lines[i]);
    if (!fields) {
      row.error = "unbalanced quotes";
    } else if (fields->size() != cols.size()) {
      row.error = "wrong field count";
    } else {
      row.fields = std::move(*fields);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// Shared loader skeleton: `convert` returns an error reason or fills `out`.
template <typename T, typename Convert>
LoadResult<T> load_table(const std::filesystem::path& path, TableKind kind,
                         Convert convert) {
  LoadResult<T> result;
  for (auto& raw : read_rows(path, kind)) {
    ++result.data_rows;
    std::string reason = raw.error;
    if (reason.empty()) {
      T rec;
      reason = convert(raw.fields, rec);
      if (reason.empty()) {
        result.rows.push_back(std::move(rec));
        continue;
      }
    }
    result.rejects.push_back(RejectRow{kind, raw.line, reason, raw.raw});
  }
  return result;
}

}  // namespace

const char* table_kind_name(TableKind kind) {
  switch (kind) {
    case TableKind::products: return "products";
    case TableKind::offers: return "offers";
    case TableKind::clicks: return "clicks";
    case TableKind::retailers: return "retailers";
  }
  return "?";
}

std::string table_header(TableKind kind) {
  const auto& cols = columns_of(kind);
  std::string out;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += cols[i];
  }
  return out;
}

LoadResult<ProductRecord> load_products(const std::filesystem::path& path) {
  auto result = load_table<ProductRecord>(
      path, TableKind::products,
      [](const std::vector<std::string>& f, ProductRecord& rec) -> std::string {
        if (f[0].empty()) return "empty prod_id";
        const auto ts = parse_int(f[2]);
        if (!ts) return "unparseable born_ts";
        if (*ts < 0) return "negative born_ts";
        rec = ProductRecord{f[0], f[1], *ts};
        return {};
      });
  std::unordered_set<std::string> seen;
  for (const auto& rec : result.rows) {
    if (!seen.insert(rec.prod_id).second) {
      throw std::runtime_error("duplicate prod_id: " + rec.prod_id);
    }
  }
  return result;
}

LoadResult<OfferRecord> load_offers(const std::filesystem::path& path) {
  return load_table<OfferRecord>(
      path, TableKind::offers,
      [](const std::vector<std::string>& f, OfferRecord& rec) -> std::string {
        if (f[1].empty()) return "empty prod_id";
        if (f[2].empty()) return "empty ret_id";
        const auto ts = parse_int(f[3]);
        if (!ts) return "unparseable ts";
        if (*ts < 0) return "negative ts";
        const auto price = Decimal::parse(f[4]);
        if (!price) return "unparseable price";
        if (price->negative()) return "negative price";
        rec = OfferRecord{f[0], f[1], f[2], *ts, *price};
        return {};
      });
}

LoadResult<ClickRecord> load_clicks(const std::filesystem::path& path) {
  return load_table<ClickRecord>(
      path, TableKind::clicks,
      [](const std::vector<std::string>& f, ClickRecord& rec) -> std::string {
        if (f[0].empty()) return "empty prod_id";
        if (f[1].empty()) return "empty ret_id";
        const auto ts = parse_int(f[2]);
        if (!ts) return "unparseable ts";
        if (*ts < 0) return "negative ts";
        const auto clicks = parse_int(f[3]);
        if (!clicks) return "unparseable clicks";
        if (*clicks < 0) return "negative clicks";
        rec = ClickRecord{f[0], f[1], *ts, *clicks};
        return {};
      });
}

LoadResult<RetailerRecord> load_retailers(const std::filesystem::path& path) {
  return load_table<RetailerRecord>(
      path, TableKind::retailers,
      [](const std::vector<std::string>& f, RetailerRecord& rec) -> std::string {
        if (f[0].empty()) return "empty ret_id";
        const auto ts = parse_int(f[2]);
        if (!ts) return "unparseable ts";
        if (*ts < 0) return "negative ts";
        rec = RetailerRecord{f[0], f[1], *ts};
        return {};
      });
}

RetailerTable retailer_snapshot(const RetailerTable& retailers) {
  // Best row per retailer: maximal ts, ties by smallest ret_name.
  std::map<std::string, const RetailerRecord*> best;
  for (const auto& rec : retailers) {
    auto [it, inserted] = best.try_emplace(rec.ret_id, &rec);
    if (inserted) continue;
    const RetailerRecord* cur = it->second;
    if (rec.ts > cur->ts ||
        (rec.ts == cur->ts && rec.ret_name < cur->ret_name)) {
      it->second = &rec;
    }
  }
  RetailerTable out;
  out.reserve(best.size());
  for (const auto& [id, rec] : best) out.push_back(*rec);
  return out;
}

RefCheckResult check_references(const ProductTable& products,
                                const RetailerTable& retailers,
                                OfferTable& offers, ClickTable& clicks,
                                bool strict, std::vector<RejectRow>& rejects) {
  std::unordered_set<std::string> prod_ids;
  for (const auto& p : products) prod_ids.insert(p.prod_id);
  std::unordered_set<std::string> ret_ids;
  for (const auto& r : retailers) ret_ids.insert(r.ret_id);

  RefCheckResult result;
  auto filter = [&](auto& table, TableKind kind, auto&& raw_of,
                    std::size_t& unknown_prod, std::size_t& unknown_ret) {
    std::remove_reference_t<decltype(table)> kept;
    kept.reserve(table.size());
    for (auto& rec : table) {
      std::string reason;
      if (!prod_ids.contains(rec.prod_id)) {
        reason = "unknown prod_id";
        ++unknown_prod;
      } else if (!ret_ids.contains(rec.ret_id)) {
        reason = "unknown ret_id";
        ++unknown_ret;
      }
      if (reason.empty() || !strict) {
        kept.push_back(std::move(rec));
      } else {
        rejects.push_back(RejectRow{kind, 0, reason, raw_of(rec)});
      }
    }
    table = std::move(kept);
  };
  filter(
      offers, TableKind::offers,
      [](const OfferRecord& o) {
        return o.offer_id + "," + o.prod_id + "," + o.ret_id;
      },
      result.unknown_prod_offers, result.unknown_ret_offers);
  filter(
      clicks, TableKind::clicks,
      [](const ClickRecord& c) { return c.prod_id + "," + c.ret_id; },
      result.unknown_prod_clicks, result.unknown_ret_clicks);
  return result;
}

namespace {

template <typename T, typename RowFn>
std::string table_to_csv(TableKind kind, const std::vector<T>& rows,
                         RowFn row_fn) {
  std::string out = table_header(kind) + "\n";
  for (const auto& rec : rows) {
    const std::vector<std::string> fields = row_fn(rec);
    out += csv::make_row(fields);
    out += '\n';
  }
  return out;
}

}  // namespace

std::string products_to_csv(const ProductTable& rows) {
  return table_to_csv(TableKind::products, rows, [](const ProductRecord& r) {
    return std::vector<std::string>{r.prod_id, r.name,
                                    std::to_string(r.born_ts)};
  });
}

std::string offers_to_csv(const OfferTable& rows) {
  return table_to_csv(TableKind::offers, rows, [](const OfferRecord& r) {
    return std::vector<std::string>{r.offer_id, r.prod_id, r.ret_id,
                                    std::to_string(r.ts), r.price.str()};
  });
}

std::string clicks_to_csv(const ClickTable& rows) {
  return table_to_csv(TableKind::clicks, rows, [](const ClickRecord& r) {
    return std::vector<std::string>{r.prod_id, r.ret_id, std::to_string(r.ts),
                                    std::to_string(r.clicks)};
  });
}

std::string retailers_to_csv(const RetailerTable& rows) {
  return table_to_csv(TableKind::retailers, rows, [](const RetailerRecord& r) {
    return std::vector<std::string>{r.ret_id, r.ret_name,
                                    std::to_string(r.ts)};
  });
}

std::string rejects_to_csv(const std::vector<RejectRow>& rows) {
  std::string out = "table,line,reason,raw\n";
  for (const auto& r : rows) {
    const std::vector<std::string> fields = {
        table_kind_name(r.table), r.line ? std::to_string(r.line) : "",
        r.reason, r.raw};
    out += csv::make_row(fields);
    out += '\n';
  }
  return out;
}

}  // namespace pricepanel
