#include "rlsvi/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace rlsvi {

using nlohmann::json;

TabularMDP build_environment(const EnvironmentSpec& spec) {
  return std::visit(
      [](const auto& env) -> TabularMDP {
        using T = std::decay_t<decltype(env)>;
        if constexpr (std::is_same_v<T, ChainSpec>) {
          return make_chain(env);
        } else if constexpr (std::is_same_v<T, RandomEnvSpec>) {
          Rng rng(env.seed);
          return make_random_mdp(env.num_states, env.num_actions, env.horizon, rng, env.alpha, env.reward_kind);
        } else {
          return load_mdp(env.path);
        }
      },
      spec);
}

void ExperimentConfig::validate() const {
  if (episodes < 1) throw std::invalid_argument("experiment needs at least one episode");
  if (agents.empty()) throw std::invalid_argument("experiment needs at least one agent");
  if (seeds.empty()) throw std::invalid_argument("experiment needs at least one seed");
  if (workers < 1) throw std::invalid_argument("experiment needs at least one worker");
  std::vector<std::string> ids;
  for (const auto& agent : agents) ids.push_back(agent.id());
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw std::invalid_argument("agent ids must be unique; set 'label' to disambiguate");
}

namespace {

EnvironmentSpec environment_from_json(const json& block, const std::filesystem::path& base_dir) {
  const std::string type = block.at("type").get<std::string>();
  if (type == "chain") {
    ChainSpec spec;
    spec.n = block.value("n", spec.n);
    spec.r_small = block.value("r_small", spec.r_small);
    spec.r_big = block.value("r_big", spec.r_big);
    spec.slip = block.value("slip", spec.slip);
    if (block.contains("reward_kind")) spec.reward_kind = reward_kind_from_string(block.at("reward_kind").get<std::string>());
    return spec;
  }
  if (type == "random") {
    RandomEnvSpec spec;
    spec.num_states = block.value("num_states", spec.num_states);
    spec.num_actions = block.value("num_actions", spec.num_actions);
    spec.horizon = block.value("horizon", spec.horizon);
    spec.seed = block.value("seed", spec.seed);
    spec.alpha = block.value("alpha", spec.alpha);
    if (block.contains("reward_kind")) spec.reward_kind = reward_kind_from_string(block.at("reward_kind").get<std::string>());
    return spec;
  }
  if (type == "file") {
    std::filesystem::path path = block.at("path").get<std::string>();
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    return FileEnvSpec{path};
  }
  throw std::invalid_argument("unknown environment type '" + type + "'");
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& document, const std::filesystem::path& base_dir) {
  ExperimentConfig config;
  try {
    config.environment = environment_from_json(document.at("environment"), base_dir);
    for (const auto& block : document.at("agents")) config.agents.push_back(AgentConfig::from_json(block));
    config.episodes = document.at("episodes").get<std::size_t>();
    config.seeds = document.at("seeds").get<std::vector<std::uint64_t>>();
    if (document.contains("output_dir")) config.output_dir = document.at("output_dir").get<std::string>();
    config.emit_plot = document.value("emit_plot", false);
    config.workers = document.value("workers", std::size_t{1});
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("experiment config: ") + e.what());
  }
  config.validate();
  return config;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  json document;
  try {
    document = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
  return from_json(document, path.parent_path());
}

namespace {

std::vector<RegretRecord> run_single(const TabularMDP& mdp, double optimal_value, const AgentConfig& config,
                                     std::size_t agent_index, std::uint64_t seed, std::size_t episodes) {
  auto agent = make_agent(config, mdp);
  std::vector<RegretRecord> records;
  records.reserve(episodes);
  double cumulative = 0.0;
  for (std::size_t k = 1; k <= episodes; ++k) {
    Rng agent_rng = Rng::derive({seed, agent_index, k, 0});
    Rng env_rng = Rng::derive({seed, agent_index, k, 1});
    agent->plan(agent_rng);
    const double regret = optimal_value - policy_value(mdp, agent->behavior());
    cumulative += regret;
    records.push_back({config.id(), seed, k, regret, cumulative});
    const Trajectory trajectory = simulate_episode_with(
        mdp, [&](std::size_t h, std::size_t s, Rng&) { return agent->act(h, s, agent_rng); }, env_rng);
    agent->observe(trajectory);
  }
  return records;
}

}  // namespace

ResultTable run_experiment(const ExperimentConfig& config) {
  return run_experiment(config, build_environment(config.environment));
}

ResultTable run_experiment(const ExperimentConfig& config, const TabularMDP& mdp) {
  config.validate();
  const double optimal_value = optimal_values(mdp).value(mdp.initial_state());
  const std::size_t num_runs = config.agents.size() * config.seeds.size();
  std::vector<std::vector<RegretRecord>> slots(num_runs);
  std::vector<std::exception_ptr> errors(num_runs);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t run = next++; run < num_runs; run = next++) {
      const std::size_t agent_index = run / config.seeds.size();
      const std::uint64_t seed = config.seeds[run % config.seeds.size()];
      try {
        slots[run] = run_single(mdp, optimal_value, config.agents[agent_index], agent_index, seed, config.episodes);
      } catch (...) {
        errors[run] = std::current_exception();
      }
    }
  };
  const std::size_t num_threads = std::min(config.workers, num_runs);
  if (num_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    for (std::size_t i = 0; i < num_threads; ++i) threads.emplace_back(worker);
  }
  for (const auto& error : errors)
    if (error) std::rethrow_exception(error);

  ResultTable results;
  results.reserve(num_runs * config.episodes);
  for (auto& slot : slots) std::move(slot.begin(), slot.end(), std::back_inserter(results));
  return results;
}

double AlgoSummary::tail_mean(std::size_t window) const {
  if (window == 0 || window > mean_per_episode.size()) throw std::invalid_argument("tail window out of range");
  double total = 0.0;
  for (std::size_t i = mean_per_episode.size() - window; i < mean_per_episode.size(); ++i) total += mean_per_episode[i];
  return total / static_cast<double>(window);
}

std::optional<double> growth_slope(std::span<const double> cumulative) {
  const std::size_t K = cumulative.size();
  if (K < 2) return std::nullopt;
  const std::size_t first = std::max<std::size_t>(1, K / 2);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t m = 0;
  for (std::size_t k = first; k <= K; ++k) {
    const double y = cumulative[k - 1];
    if (!(y > 0.0)) return std::nullopt;
    const double lx = std::log(static_cast<double>(k));
    const double ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  const double denom = static_cast<double>(m) * sxx - sx * sx;
  if (m < 2 || denom <= 0.0) return std::nullopt;
  return (static_cast<double>(m) * sxy - sx * sy) / denom;
}

std::vector<AlgoSummary> summarize(const ResultTable& results) {
  // (algo, seed) -> curve, keeping first-appearance order of algos.
  std::vector<std::string> order;
  std::map<std::string, std::map<std::uint64_t, std::vector<const RegretRecord*>>> runs;
  for (const auto& record : results) {
    if (!runs.count(record.algo)) order.push_back(record.algo);
    runs[record.algo][record.seed].push_back(&record);
  }

  std::vector<AlgoSummary> summaries;
  for (const auto& algo : order) {
    const auto& by_seed = runs.at(algo);
    std::size_t K = 0;
    for (const auto& [seed, records] : by_seed) K = std::max(K, records.size());
    for (const auto& [seed, records] : by_seed)
      if (records.size() != K) throw std::invalid_argument("runs of '" + algo + "' have different lengths");

    AlgoSummary summary;
    summary.algo = algo;
    summary.num_seeds = by_seed.size();
    summary.mean_cumulative.assign(K, 0.0);
    summary.stderr_cumulative.assign(K, 0.0);
    summary.mean_per_episode.assign(K, 0.0);
    const double m = static_cast<double>(summary.num_seeds);
    for (std::size_t i = 0; i < K; ++i) {
      double sum = 0.0, sum_sq = 0.0, per_episode = 0.0;
      for (const auto& [seed, records] : by_seed) {
        const auto& record = *records[i];
        if (record.episode != i + 1) throw std::invalid_argument("results are not ordered by episode");
        sum += record.cumulative_regret;
        sum_sq += record.cumulative_regret * record.cumulative_regret;
        per_episode += record.per_episode_regret;
      }
      const double mean = sum / m;
      summary.mean_cumulative[i] = mean;
      summary.mean_per_episode[i] = per_episode / m;
      if (summary.num_seeds > 1) {
        const double variance = std::max(0.0, (sum_sq - m * mean * mean) / (m - 1.0));
        summary.stderr_cumulative[i] = std::sqrt(variance / m);
      }
    }
    summary.growth_slope = growth_slope(summary.mean_cumulative);
    summaries.push_back(std::move(summary));
  }
  return summaries;
}

namespace {

std::string format_double(double x) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), x);
  return std::string(buffer, result.ptr);
}

double parse_double(std::string_view text, const std::string& where) {
  double x = 0.0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), x);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size())
    throw std::runtime_error(where + ": malformed number '" + std::string(text) + "'");
  return x;
}

template <typename Int>
Int parse_integer(std::string_view text, const std::string& where) {
  Int x = 0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), x);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size())
    throw std::runtime_error(where + ": malformed integer '" + std::string(text) + "'");
  return x;
}

}  // namespace

void write_results(const ResultTable& results, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  std::string buffer;
  buffer.reserve(64 * (results.size() + 1));
  buffer += kCsvHeader;
  buffer += '\n';
  for (const auto& record : results) {
    if (record.algo.find_first_of(",\"\n") != std::string::npos)
      throw std::invalid_argument("algo id '" + record.algo + "' cannot be written to CSV");
    buffer += record.algo;
    buffer += ',';
    buffer += std::to_string(record.seed);
    buffer += ',';
    buffer += std::to_string(record.episode);
    buffer += ',';
    buffer += format_double(record.per_episode_regret);
    buffer += ',';
    buffer += format_double(record.cumulative_regret);
    buffer += '\n';
  }
  out << buffer;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

ResultTable read_results(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw std::runtime_error(path.string() + ": missing or unexpected CSV header");
  ResultTable results;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_number);
    std::vector<std::string_view> fields;
    std::string_view rest = line;
    for (std::size_t comma = rest.find(','); comma != std::string_view::npos; comma = rest.find(',')) {
      fields.push_back(rest.substr(0, comma));
      rest.remove_prefix(comma + 1);
    }
    fields.push_back(rest);
    if (fields.size() != 5) throw std::runtime_error(where + ": expected 5 fields");
    results.push_back({std::string(fields[0]), parse_integer<std::uint64_t>(fields[1], where),
                       parse_integer<std::size_t>(fields[2], where), parse_double(fields[3], where),
                       parse_double(fields[4], where)});
  }
  return results;
}

namespace {

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

}  // namespace

void emit_plot(const std::vector<AlgoSummary>& summaries, const std::filesystem::path& path) {
  constexpr double kWidth = 800, kHeight = 500, kLeft = 70, kRight = 160, kTop = 30, kBottom = 50;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  std::size_t K = 1;
  double y_max = 0.0;
  for (const auto& s : summaries) {
    K = std::max(K, s.mean_cumulative.size());
    for (std::size_t i = 0; i < s.mean_cumulative.size(); ++i)
      y_max = std::max(y_max, s.mean_cumulative[i] + s.stderr_cumulative[i]);
  }
  if (y_max <= 0.0) y_max = 1.0;
  const auto x_of = [&](std::size_t k) { return kLeft + plot_w * static_cast<double>(k) / static_cast<double>(K); };
  const auto y_of = [&](double y) { return kTop + plot_h * (1.0 - std::max(0.0, y) / y_max); };

  std::ostringstream svg;
  svg.precision(6);
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<g stroke=\"black\" stroke-width=\"1\">"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w << "\" y2=\""
      << kTop + plot_h << "\"/>"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + plot_h
      << "\"/></g>\n"
      << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">episode</text>\n"
      << "<text x=\"16\" y=\"" << kTop + plot_h / 2 << "\" transform=\"rotate(-90 16 " << kTop + plot_h / 2
      << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">cumulative regret</text>\n"
      << "<text x=\"" << kLeft - 6 << "\" y=\"" << kTop + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << y_max << "</text>\n"
      << "<text x=\"" << kLeft + plot_w << "\" y=\"" << kTop + plot_h + 16
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << K << "</text>\n";

  // Downsample long curves to at most ~1000 vertices.
  const std::size_t stride = std::max<std::size_t>(1, K / 1000);
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const auto& s = summaries[i];
    const char* color = kPalette[i % std::size(kPalette)];
    const std::size_t n = s.mean_cumulative.size();
    std::vector<std::size_t> ks;
    for (std::size_t k = 1; k <= n; k += stride) ks.push_back(k);
    if (!ks.empty() && ks.back() != n) ks.push_back(n);

    svg << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
    for (std::size_t k : ks) svg << x_of(k) << ',' << y_of(s.mean_cumulative[k - 1] + s.stderr_cumulative[k - 1]) << ' ';
    for (auto it = ks.rbegin(); it != ks.rend(); ++it)
      svg << x_of(*it) << ',' << y_of(s.mean_cumulative[*it - 1] - s.stderr_cumulative[*it - 1]) << ' ';
    svg << "\"/>\n";

    svg << "<path fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" d=\"";
    for (std::size_t j = 0; j < ks.size(); ++j)
      svg << (j == 0 ? 'M' : 'L') << x_of(ks[j]) << ',' << y_of(s.mean_cumulative[ks[j] - 1]) << ' ';
    svg << "\"/>\n";

    const double legend_y = kTop + 10 + 18 * static_cast<double>(i);
    svg << "<rect x=\"" << kLeft + plot_w + 15 << "\" y=\"" << legend_y - 8 << "\" width=\"12\" height=\"3\" fill=\""
        << color << "\"/>"
        << "<text x=\"" << kLeft + plot_w + 32 << "\" y=\"" << legend_y
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(s.algo) << "</text>\n";
  }
  svg << "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << svg.str();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace rlsvi
