#include "sfi/filterbank.hpp"

#include "hexfloat.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace sfi {

using nlohmann::json;

double erb_number(double f) { return 21.4 * std::log10(1.0 + 0.00437 * f); }

double erb_number_inverse(double e) { return (std::pow(10.0, e / 21.4) - 1.0) / 0.00437; }

std::vector<double> erb_space(double f_min, double f_max, Index n) {
  if (!(f_min > 0.0) || !(f_max > f_min) || n < 2)
    throw std::invalid_argument("erb_space: need 0 < f_min < f_max and n >= 2");
  const double e_min = erb_number(f_min);
  const double e_max = erb_number(f_max);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const double e = e_min + (e_max - e_min) * static_cast<double>(i) / static_cast<double>(n - 1);
    out[static_cast<std::size_t>(i)] = erb_number_inverse(e);
  }
  out.front() = f_min;
  out.back() = f_max;
  return out;
}

Index FilterbankSpec::base_index(Index channel) const {
  if (channel < 0 || channel >= size()) throw std::out_of_range("FilterbankSpec: channel out of range");
  return channel < base_count() ? channel : channel - base_count();
}

double FilterbankSpec::phase_offset(Index channel) const {
  return polarity(channel) > 0 ? 0.0 : std::numbers::pi;
}

double FilterbankSpec::center_frequency(Index channel) const {
  return base[static_cast<std::size_t>(base_index(channel))].center_frequency;
}

AnalogFilterParams<double> FilterbankSpec::channel(Index channel) const {
  auto params = base[static_cast<std::size_t>(base_index(channel))];
  params.phase += phase_offset(channel);
  return params;
}

void FilterbankSpec::validate() const {
  if (base.empty()) throw std::invalid_argument("FilterbankSpec: no filters");
  if (!center_index.empty() && center_index.size() != base.size())
    throw std::invalid_argument("FilterbankSpec: center_index length mismatch");
  for (const auto& params : base) params.validate();
}

int BankLayout::center_count() const {
  int n = 0;
  for (const auto& [centers, phases] : groups) n += centers;
  return n;
}

int BankLayout::base_channel_count() const {
  int n = 0;
  for (const auto& [centers, phases] : groups) n += centers * phases;
  return n;
}

FilterbankSpec init_filterbank(const InitOptions& options) {
  const auto& layout = options.layout;
  const auto centers = erb_space(layout.f_min, layout.f_max, layout.center_count());
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  FilterbankSpec spec;
  spec.paired = layout.paired;
  int center = 0;
  for (const auto& [group_centers, phases] : layout.groups) {
    for (int c = 0; c < group_centers; ++c, ++center) {
      for (int k = 0; k < phases; ++k) {
        double slot = static_cast<double>(k);
        if (options.phase_jitter > 0.0) slot += options.phase_jitter * unit(rng);
        const double phi = std::fmod(slot * std::numbers::pi / phases, std::numbers::pi);
        spec.base.push_back(AnalogFilterParams<double>::mpgtf(centers[static_cast<std::size_t>(center)], phi));
        spec.center_index.push_back(center);
      }
    }
  }
  return spec;
}

FilterbankSpec init_filterbank(std::uint64_t seed) {
  InitOptions options;
  options.seed = seed;
  return init_filterbank(options);
}

std::string to_json(const FilterbankSpec& spec) {
  json filters = json::array();
  for (std::size_t i = 0; i < spec.base.size(); ++i) {
    const auto& p = spec.base[i];
    json entry{{"f", detail::to_hexfloat(p.center_frequency)},
               {"phi", detail::to_hexfloat(p.phase)},
               {"a", detail::to_hexfloat(p.amplitude)},
               {"p", p.order},
               {"trainable", {{"f", p.trainable.center_frequency}, {"phi", p.trainable.phase}}}};
    if (!spec.center_index.empty()) entry["center_index"] = spec.center_index[i];
    filters.push_back(std::move(entry));
  }
  json doc{{"format", "sfi-filterbank"},
           {"version", 1},
           {"pair_offset", spec.pair_offset()},
           {"filters", std::move(filters)}};
  return doc.dump(1);
}

FilterbankSpec filterbank_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("filterbank JSON: ") + e.what());
  }
  try {
    FilterbankSpec spec;
    const auto& filters = doc.at("filters");
    const auto pair_offset = doc.at("pair_offset").get<Index>();
    spec.paired = pair_offset != 0;
    if (spec.paired && pair_offset != static_cast<Index>(filters.size()))
      throw Error("filterbank JSON: pair_offset must equal the number of stored filters or 0");
    bool has_centers = !filters.empty() && filters.front().contains("center_index");
    for (const auto& entry : filters) {
      AnalogFilterParams<double> p;
      p.amplitude = detail::from_hexfloat(entry.at("a").get<std::string>());
      p.order = entry.at("p").get<int>();
      p.phase = detail::from_hexfloat(entry.at("phi").get<std::string>());
      p.set_center_frequency(detail::from_hexfloat(entry.at("f").get<std::string>()));
      const auto& trainable = entry.at("trainable");
      p.trainable.center_frequency = trainable.at("f").get<bool>();
      p.trainable.phase = trainable.at("phi").get<bool>();
      spec.base.push_back(p);
      if (has_centers) spec.center_index.push_back(entry.at("center_index").get<int>());
    }
    spec.validate();
    return spec;
  } catch (const json::exception& e) {
    throw Error(std::string("filterbank JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw Error(std::string("filterbank JSON: ") + e.what());
  }
}

void save_filterbank(const std::string& path, const FilterbankSpec& spec) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << to_json(spec) << '\n';
  if (!out) throw Error("failed writing '" + path + "'");
}

FilterbankSpec load_filterbank(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return filterbank_from_json(buffer.str());
}

}  // namespace sfi
