#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "pricepanel/records.hpp"

namespace pricepanel {

enum class TableKind { products, offers, clicks, retailers };

const char* table_kind_name(TableKind kind);

// Expected header for a table kind, e.g. "prod_id,name,born_ts".
std::string table_header(TableKind kind);

struct RejectRow {
  TableKind table = TableKind::products;
  std::size_t line = 0;  // 1-based physical line in the source file
  std::string reason;
  std::string raw;
  bool operator==(const RejectRow&) const = default;
};

template <typename T>
struct LoadResult {
  std::vector<T> rows;
  std::vector<RejectRow> rejects;
  std::size_t data_rows = 0;  // rows.size() + rejects.size()
};

// Readers accept CSV (.csv) and JSON-lines (.jsonl), chosen by extension.
// Malformed rows land in `rejects` with a reason; structural problems
// (missing file, header mismatch, duplicate prod_id) throw.
LoadResult<ProductRecord> load_products(const std::filesystem::path& path);
LoadResult<OfferRecord> load_offers(const std::filesystem::path& path);
LoadResult<ClickRecord> load_clicks(const std::filesystem::path& path);
LoadResult<RetailerRecord> load_retailers(const std::filesystem::path& path);

// One row per distinct ret_id, carrying the attributes at that retailer's
// maximal ts. Ties at the maximum resolve to the lexicographically smallest
// ret_name, so the result is independent of input order. Output sorted by
// ret_id.
RetailerTable retailer_snapshot(const RetailerTable& retailers);

struct RefCheckResult {
  std::size_t unknown_prod_offers = 0;
  std::size_t unknown_ret_offers = 0;
  std::size_t unknown_prod_clicks = 0;
  std::size_t unknown_ret_clicks = 0;
  std::size_t total() const {
    return unknown_prod_offers + unknown_ret_offers + unknown_prod_clicks +
           unknown_ret_clicks;
  }
};

// Referential check of offers/clicks against products/retailers. In strict
// mode violating rows are removed and appended to `rejects`; otherwise they
// are only counted.
RefCheckResult check_references(const ProductTable& products,
                                const RetailerTable& retailers,
                                OfferTable& offers, ClickTable& clicks,
                                bool strict, std::vector<RejectRow>& rejects);

std::string products_to_csv(const ProductTable& rows);
std::string offers_to_csv(const OfferTable& rows);
std::string clicks_to_csv(const ClickTable& rows);
std::string retailers_to_csv(const RetailerTable& rows);
std::string rejects_to_csv(const std::vector<RejectRow>& rows);

}  // namespace pricepanel
