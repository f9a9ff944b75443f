#include "pricepanel/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

#include "pricepanel/csv.hpp"
#include "pricepanel/format.hpp"

namespace pricepanel {

namespace {

using CellKey = std::tuple<std::string, std::string, YearMonth>;
using PairKey = std::pair<std::string, std::string>;

}  // namespace

std::vector<TimedOffer> attach_time(const OfferTable& offers,
                                    YearMonth base_month) {
  std::vector<TimedOffer> out;
  out.reserve(offers.size());
  for (const auto& o : offers) {
    const YearMonth month = unix_to_month(o.ts);
    out.push_back(TimedOffer{o.prod_id, o.ret_id, o.ts, o.price,
                             unix_to_week(o.ts), month,
                             months_between(month, base_month)});
  }
  return out;
}

std::vector<TimedClick> attach_time(const ClickTable& clicks,
                                    YearMonth base_month) {
  std::vector<TimedClick> out;
  out.reserve(clicks.size());
  for (const auto& c : clicks) {
    const YearMonth month = unix_to_month(c.ts);
    out.push_back(TimedClick{c.prod_id, c.ret_id, c.ts, c.clicks,
                             unix_to_week(c.ts), month,
                             months_between(month, base_month)});
  }
  return out;
}

ProductTable filter_cohort(const ProductTable& products) {
  ProductTable out;
  for (const auto& p : products) {
    if (p.born_ts > kCohortBirthCutoff) out.push_back(p);
  }
  return out;
}

std::unordered_set<std::string> id_set(const ProductTable& products) {
  std::unordered_set<std::string> out;
  out.reserve(products.size());
  for (const auto& p : products) out.insert(p.prod_id);
  return out;
}

template <typename Row>
static std::vector<Row> window_filter(
    const std::vector<Row>& rows,
    const std::unordered_set<std::string>& cohort_ids, EventWindow window) {
  std::vector<Row> out;
  for (const auto& r : rows) {
    if (window.contains(r.e) && cohort_ids.contains(r.prod_id)) {
      out.push_back(r);
    }
  }
  return out;
}

std::vector<TimedOffer> apply_event_window(
    const std::vector<TimedOffer>& rows,
    const std::unordered_set<std::string>& cohort_ids, EventWindow window) {
  return window_filter(rows, cohort_ids, window);
}

std::vector<TimedClick> apply_event_window(
    const std::vector<TimedClick>& rows,
    const std::unordered_set<std::string>& cohort_ids, EventWindow window) {
  return window_filter(rows, cohort_ids, window);
}

MonthlyPanel aggregate_monthly(const std::vector<TimedOffer>& offers,
                               const std::vector<TimedClick>& clicks,
                               const PanelOptions& opts) {
  // std::map keys keep every reduction in sorted order, so the result does
  // not depend on input order.
  std::map<CellKey, std::vector<Decimal>> price_groups;
  for (const auto& o : offers) {
    price_groups[{o.prod_id, o.ret_id, o.month}].push_back(o.price);
  }
  std::map<CellKey, std::int64_t> click_groups;
  for (const auto& c : clicks) {
    click_groups[{c.prod_id, c.ret_id, c.month}] += c.clicks;
  }

  MonthlyPanel out;
  out.clicks.reserve(click_groups.size());
  for (const auto& [key, sum] : click_groups) {
    out.clicks.push_back(
        MonthlyClicks{std::get<0>(key), std::get<1>(key), std::get<2>(key), sum});
  }
  out.cells.reserve(price_groups.size());
  for (const auto& [key, prices] : price_groups) {
    PanelCell cell;
    cell.prod_id = std::get<0>(key);
    cell.ret_id = std::get<1>(key);
    cell.month = std::get<2>(key);
    cell.mean_price = Decimal::mean(prices);
    const auto it = click_groups.find(key);
    if (it != click_groups.end()) cell.clicks = it->second;
    cell.e = months_between(cell.month, opts.base_month);
    cell.bin = assign_bin(cell.e, opts.window);
    out.cells.push_back(std::move(cell));
  }
  return out;
}

IndexedPanel build_index(const std::vector<PanelCell>& cells,
                         YearMonth base_month) {
  std::map<PairKey, Decimal> base;
  for (const auto& c : cells) {
    if (c.month == base_month) base.emplace(PairKey{c.prod_id, c.ret_id}, c.mean_price);
  }

  IndexedPanel out;
  std::map<PairKey, bool> pair_has_usable_base;
  out.rows.reserve(cells.size());
  for (const auto& c : cells) {
    IndexedObservation obs;
    obs.prod_id = c.prod_id;
    obs.ret_id = c.ret_id;
    obs.month = c.month;
    obs.e = c.e;
    obs.bin = c.bin;
    obs.mean_price = c.mean_price;
    obs.clicks = c.clicks;
    const auto it = base.find(PairKey{c.prod_id, c.ret_id});
    bool usable = false;
    if (it != base.end()) {
      obs.base_price = it->second;
      if (!it->second.zero()) {
        usable = true;
        const double p =
            100.0 * (c.mean_price.to_double() / it->second.to_double());
        obs.level_index = p;
        if (p > 0.0) obs.log_index = std::log(p);
      }
    }
    pair_has_usable_base[PairKey{c.prod_id, c.ret_id}] = usable;
    out.rows.push_back(std::move(obs));
  }
  for (const auto& [pair, usable] : pair_has_usable_base) {
    if (!usable) {
      ++out.diagnostics.pairs_without_base;
      if (base.contains(pair)) ++out.diagnostics.zero_base_pairs;
    }
  }
  std::sort(out.rows.begin(), out.rows.end(), [](const auto& a, const auto& b) {
    return std::tie(a.prod_id, a.ret_id, a.month) <
           std::tie(b.prod_id, b.ret_id, b.month);
  });
  return out;
}

ObsTable assemble_obs(ObsTable indexed, const std::vector<MonthlyClicks>& clicks,
                      const RetailerTable& snapshot) {
  std::map<CellKey, std::int64_t> click_by_key;
  for (const auto& c : clicks) {
    click_by_key[{c.prod_id, c.ret_id, c.month}] = c.clicks;
  }
  std::map<std::string, std::string> name_by_ret;
  for (const auto& r : snapshot) name_by_ret[r.ret_id] = r.ret_name;

  for (auto& row : indexed) {
    const auto ck = click_by_key.find({row.prod_id, row.ret_id, row.month});
    row.clicks = ck == click_by_key.end()
                     ? std::nullopt
                     : std::optional<std::int64_t>(ck->second);
    const auto rn = name_by_ret.find(row.ret_id);
    row.ret_name = rn == name_by_ret.end()
                       ? std::nullopt
                       : std::optional<std::string>(rn->second);
  }
  return indexed;
}

SampleSplit split_samples(const ObsTable& obs, const ProductTable& cohort,
                          const SupPatternSet& patterns) {
  std::unordered_set<std::string> sup_ids;
  std::unordered_set<std::string> control_ids;
  std::unordered_set<std::string> strict_ids;
  static const char* kStrictPattern = "%graphics card%";
  const IlikePattern strict_pattern = IlikePattern::compile(kStrictPattern);
  SampleSplit out;
  for (const auto& p : cohort) {
    if (patterns.classify(p.name)) {
      sup_ids.insert(p.prod_id);
    } else {
      control_ids.insert(p.prod_id);
      if (ilike_match(strict_pattern, fold(p.name))) {
        strict_ids.insert(p.prod_id);
      }
    }
  }
  out.sup_products = sup_ids.size();
  out.control_products = control_ids.size();
  out.strict_products = strict_ids.size();
  for (const auto& row : obs) {
    if (sup_ids.contains(row.prod_id)) {
      out.treated.push_back(row);
    } else if (control_ids.contains(row.prod_id)) {
      out.control.push_back(row);
      if (strict_ids.contains(row.prod_id)) out.strict.push_back(row);
    }
  }
  return out;
}

std::string obs_to_csv(const ObsTable& rows) {
  std::string out = "prod_id,ret_id,ret_name,month,e,b,P,logP,clk\n";
  for (const auto& r : rows) {
    const std::vector<std::string> fields = {
        r.prod_id,
        r.ret_id,
        r.ret_name.value_or(""),
        format_month(r.month),
        std::to_string(r.e),
        std::to_string(r.bin),
        r.level_index ? format_double(*r.level_index) : "",
        r.log_index ? format_double(*r.log_index) : "",
        r.clicks ? std::to_string(*r.clicks) : ""};
    out += csv::make_row(fields);
    out += '\n';
  }
  return out;
}

ObsTable obs_from_csv(const std::filesystem::path& path) {
  const auto lines = csv::read_lines(path);
  if (lines.empty() ||
      lines[0] != "prod_id,ret_id,ret_name,month,e,b,P,logP,clk") {
    throw std::runtime_error("bad analysis table header in " + path.string());
  }
  ObsTable out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = csv::parse_row(lines[i]);
    if (!fields || fields->size() != 9) {
      throw std::runtime_error("bad analysis table row at line " +
                               std::to_string(i + 1) + " in " + path.string());
    }
    const auto& f = *fields;
    IndexedObservation row;
    row.prod_id = f[0];
    row.ret_id = f[1];
    if (!f[2].empty()) row.ret_name = f[2];
    const auto month = parse_month(f[3]);
    if (!month) {
      throw std::runtime_error("bad month at line " + std::to_string(i + 1));
    }
    row.month = *month;
    row.e = std::stoi(f[4]);
    row.bin = std::stoi(f[5]);
    auto parse_opt_double = [](const std::string& s) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      return std::stod(s);
    };
    row.level_index = parse_opt_double(f[6]);
    row.log_index = parse_opt_double(f[7]);
    if (!f[8].empty()) row.clicks = std::stoll(f[8]);
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace pricepanel
