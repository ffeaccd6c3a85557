#pragma once

// Corpus-level commands behind the attngraph CLI. Each command is a plain
// function so it can be driven from tests; outputs are byte-identical for
// identical inputs regardless of worker count.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "attngraph/aggregate.hpp"
#include "attngraph/attn_io.hpp"
#include "attngraph/coincide.hpp"
#include "attngraph/cst_metrics.hpp"
#include "attngraph/errors.hpp"
#include "attngraph/graph_build.hpp"
#include "attngraph/graph_io.hpp"
#include "attngraph/head_stats.hpp"
#include "attngraph/task_records.hpp"

namespace attngraph {

namespace fs = std::filesystem;

struct Diagnostic {
  std::string input;
  std::string message;
};

struct RunSummary {
  std::size_t inputs = 0;
  std::size_t processed = 0;
  std::vector<Diagnostic> diagnostics;

  std::size_t skipped() const noexcept { return diagnostics.size(); }
  int exit_code() const noexcept { return processed > 0 ? 0 : 1; }
};

namespace detail {

// Regular, non-hidden files directly under `dir`, sorted by name.
inline std::vector<fs::path> list_inputs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename().string();
    if (name.empty() || name.front() == '.') continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

// Runs task(i) for i in [0, count) on up to `workers` threads.
inline void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& task) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) task(i);
    });
  }
}

inline std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

inline std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string quoted = "\"";
  for (const char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + '"';
}

inline nlohmann::json diagnostics_json(const std::vector<Diagnostic>& diagnostics) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& d : diagnostics) out.push_back({{"input", d.input}, {"error", d.message}});
  return out;
}

inline void warn(std::ostream* log, const std::vector<Diagnostic>& diagnostics) {
  if (log == nullptr) return;
  for (const auto& d : diagnostics) *log << "warning: " << d.input << ": " << d.message << '\n';
}

inline std::map<std::string, std::string> read_sources(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::map<std::string, std::string> sources;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = nlohmann::json::parse(line);
    sources[j.at("sample_id").get<std::string>()] = j.at("source_text").get<std::string>();
  }
  return sources;
}

inline std::vector<ProgramGraph> graphs_only(std::vector<GraphSample> samples) {
  std::vector<ProgramGraph> graphs;
  graphs.reserve(samples.size());
  for (auto& s : samples) graphs.push_back(std::move(s.graph));
  return graphs;
}

}  // namespace detail

inline nlohmann::json config_json(const ExtractionConfig& config) {
  return {{"layer", config.layer ? nlohmann::json(*config.layer) : nlohmann::json("last")},
          {"reduction", std::string(to_string(config.reduction))},
          {"mode", std::string(to_string(config.mode))},
          {"root", config.root.to_string()},
          {"sequence_edges", config.sequence_edges},
          {"sequence_across_masks", config.sequence_across_masks},
          {"mask_symbols", config.mask_symbols},
          {"tie_rule", "lowest-index"}};
}

/// Extract one graph per ATTN1 file in `attn_dir`. Writes `out` (graph JSONL,
/// ordered by sample id) and `out` + ".manifest.json". Unreadable files are
/// skipped and listed in the manifest.
inline RunSummary run_extract(const fs::path& attn_dir, const fs::path& out, const ExtractionConfig& config,
                              std::size_t workers = 1, std::ostream* log = nullptr) {
  const auto files = detail::list_inputs(attn_dir);
  RunSummary summary;
  summary.inputs = files.size();
  if (files.empty()) {
    if (log != nullptr) *log << "error: no input files in " << attn_dir.string() << '\n';
    return summary;
  }

  struct Slot {
    std::optional<GraphSample> sample;
    std::string error;
  };
  std::vector<Slot> slots(files.size());
  detail::parallel_for(files.size(), workers, [&](std::size_t i) {
    try {
      const auto contents = read_attn_file(files[i]);
      slots[i].sample = GraphSample{extract_graph(contents.tensor, contents.sample, config),
                                    contents.sample.source_text};
    } catch (const std::exception& e) {
      slots[i].error = e.what();
    }
  });

  std::vector<std::pair<std::size_t, GraphSample>> done;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (slots[i].sample) {
      done.emplace_back(i, std::move(*slots[i].sample));
    } else {
      summary.diagnostics.push_back({files[i].filename().string(), slots[i].error});
    }
  }
  std::stable_sort(done.begin(), done.end(), [](const auto& a, const auto& b) {
    return a.second.graph.sample_id < b.second.graph.sample_id;
  });
  summary.processed = done.size();

  {
    auto stream = detail::open_output(out);
    for (const auto& [index, sample] : done) stream << graph_line(sample) << '\n';
  }
  nlohmann::json manifest{{"command", "extract"},
                          {"config", config_json(config)},
                          {"inputs", summary.inputs},
                          {"processed", summary.processed},
                          {"skipped", summary.skipped()},
                          {"diagnostics", detail::diagnostics_json(summary.diagnostics)}};
  {
    auto stream = detail::open_output(fs::path(out.string() + ".manifest.json"));
    stream << manifest.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  }
  detail::warn(log, summary.diagnostics);
  return summary;
}

/// Per-layer diagonality profile of every ATTN1 file:
/// CSV sample_id,layer,mean_abs_offset,band_mass.
inline RunSummary run_profile(const fs::path& attn_dir, const fs::path& out, Reduction reduction,
                              std::size_t workers = 1, std::ostream* log = nullptr) {
  const auto files = detail::list_inputs(attn_dir);
  RunSummary summary;
  summary.inputs = files.size();
  if (files.empty()) return summary;

  struct Slot {
    std::string sample_id;
    std::vector<LayerProfile> profiles;
    std::string error;
    bool ok = false;
  };
  std::vector<Slot> slots(files.size());
  detail::parallel_for(files.size(), workers, [&](std::size_t i) {
    try {
      const auto contents = read_attn_file(files[i]);
      slots[i].sample_id = contents.sample.sample_id;
      slots[i].profiles = profile_layers(contents.tensor, contents.sample, reduction);
      slots[i].ok = true;
    } catch (const std::exception& e) {
      slots[i].error = e.what();
    }
  });

  std::vector<const Slot*> done;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (slots[i].ok) {
      done.push_back(&slots[i]);
    } else {
      summary.diagnostics.push_back({files[i].filename().string(), slots[i].error});
    }
  }
  std::stable_sort(done.begin(), done.end(), [](const Slot* a, const Slot* b) { return a->sample_id < b->sample_id; });
  summary.processed = done.size();

  auto stream = detail::open_output(out);
  stream << "sample_id,layer,mean_abs_offset,band_mass\n";
  for (const Slot* s : done) {
    for (const auto& p : s->profiles) {
      stream << fmt::format("{},{},{:.6f},{:.6f}\n", detail::csv_field(s->sample_id), p.layer, p.mean_abs_offset,
                            p.band_mass);
    }
  }
  detail::warn(log, summary.diagnostics);
  return summary;
}

struct CstRun {
  RunSummary summary;
  CstReport report;
};

/// CST evaluation of extracted graphs. Source text comes from `sources`
/// (JSONL of {"sample_id","source_text"}) when given, else from the graph
/// records. Writes <prefix>edges.csv, <prefix>tree_distance.csv,
/// <prefix>tree_sequence.csv and <prefix>parent_types.csv (top `top_k`).
inline CstRun run_eval_cst(const fs::path& graphs_path, const std::optional<fs::path>& sources_path,
                           const std::string& prefix, std::size_t top_k = kTopParentTypes,
                           std::ostream* log = nullptr) {
  const auto samples = read_graphs(graphs_path);
  const auto sources = sources_path ? detail::read_sources(*sources_path) : std::map<std::string, std::string>{};
  CstRun run;
  run.summary.inputs = samples.size();

  std::vector<std::pair<const GraphSample*, CstReport>> per_sample;
  for (const auto& s : samples) {
    const auto it = sources.find(s.graph.sample_id);
    const std::string& text = it != sources.end() ? it->second : s.source_text;
    try {
      const CstIndex cst = parse_cst(text, s.graph.nodes);
      if (cst.lexeme_count() == 0 || cst.mapped_count() == 0) {
        run.summary.diagnostics.push_back({s.graph.sample_id, "no CST leaves align with the word tokens"});
        ++run.report.skipped_samples;
        continue;
      }
      per_sample.emplace_back(&s, evaluate_graph(s.graph, cst));
      ++run.summary.processed;
    } catch (const Error& e) {
      run.summary.diagnostics.push_back({s.graph.sample_id, e.what()});
      ++run.report.skipped_samples;
    }
  }

  auto edges = detail::open_output(prefix + "edges.csv");
  edges << "sample_id,src,dst,src_token,dst_token,tree_distance,sequence_distance,last_common_parent\n";
  for (const auto& [sample, report] : per_sample) {
    for (const auto& e : report.edges) {
      edges << fmt::format("{},{},{},{},{},{},{},{}\n", detail::csv_field(sample->graph.sample_id), e.src, e.dst,
                           detail::csv_field(sample->graph.nodes[e.src]), detail::csv_field(sample->graph.nodes[e.dst]),
                           e.tree_distance, e.sequence_distance, detail::csv_field(e.last_common_parent_type));
    }
    run.report.merge(report);
  }

  auto tree = detail::open_output(prefix + "tree_distance.csv");
  tree << "tree_distance,count\n";
  for (const auto& [d, c] : run.report.tree_distance_counts) tree << d << ',' << c << '\n';

  auto joint = detail::open_output(prefix + "tree_sequence.csv");
  joint << "tree_distance,sequence_distance,count\n";
  for (const auto& [k, c] : run.report.joint_counts) joint << k.first << ',' << k.second << ',' << c << '\n';

  auto parents = detail::open_output(prefix + "parent_types.csv");
  parents << "parent_type,count\n";
  for (const auto& [type, c] : run.report.top_parent_types(top_k)) parents << detail::csv_field(type) << ',' << c << '\n';

  if (log != nullptr) {
    *log << "evaluated " << run.report.evaluated() << " edges from " << run.summary.processed << " samples; "
         << run.report.unmapped_edges << " edges without CST leaves\n";
  }
  detail::warn(log, run.summary.diagnostics);
  return run;
}

// Queries file: CSV lines name,src_token,dst_token[,symmetric], '#' comments.
inline std::vector<PairQuery> read_queries(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<PairQuery> queries;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t comma; (comma = line.find(',', start)) != std::string::npos; start = comma + 1) {
      fields.push_back(line.substr(start, comma - start));
    }
    fields.push_back(line.substr(start));
    if (fields.size() < 3 || fields.size() > 4) throw ArgumentError("bad query line: " + line);
    PairQuery q{fields[0], fields[1], fields[2], true};
    if (fields.size() == 4) q.symmetric = fields[3] == "1" || fields[3] == "true" || fields[3] == "yes";
    queries.push_back(std::move(q));
  }
  return queries;
}

/// CSV query,head,count for each query plus an "all" row block with overall
/// head usage of forward attention edges.
inline RunSummary run_head_stats(const fs::path& graphs_path, const std::vector<PairQuery>& queries,
                                 const fs::path& out, std::ostream* log = nullptr) {
  const auto graphs = detail::graphs_only(read_graphs(graphs_path));
  RunSummary summary;
  summary.inputs = graphs.size();
  summary.processed = graphs.size();
  if (graphs.empty()) return summary;
  const std::size_t heads = graphs.front().num_heads;

  auto stream = detail::open_output(out);
  stream << "query,head,count\n";
  for (const auto& q : queries) {
    const auto dist = count_pair_edges(graphs, q, heads);
    for (std::size_t h = 0; h < heads; ++h) stream << detail::csv_field(q.name) << ',' << h + 1 << ',' << dist.counts[h] << '\n';
    if (log != nullptr) *log << q.name << ": " << dist.total << " edges\n";
  }
  const auto all = edge_head_histogram(graphs, heads);
  for (std::size_t h = 0; h < heads; ++h) stream << "all," << h + 1 << ',' << all[h] << '\n';
  return summary;
}

struct CoincideRun {
  RunSummary summary;
  CoincidenceReport report;
};

/// Pooled per-edge coincidence against reference records matched by sample id:
/// CSV reference_type,reference_count,recovered_count,proportion.
inline CoincideRun run_coincide(const fs::path& graphs_path, const fs::path& reference_path, const fs::path& out,
                                const CoincidenceOptions& options = {}, std::ostream* log = nullptr) {
  const auto graphs = detail::graphs_only(read_graphs(graphs_path));
  auto ingest = ingest_records(reference_path);
  std::map<std::string, const TaskRecord*> by_id;
  for (const auto& r : ingest.records) by_id.emplace(r.sample_id, &r);

  CoincideRun run;
  run.summary.inputs = graphs.size();
  for (const auto& d : ingest.diagnostics) run.summary.diagnostics.push_back({reference_path.filename().string(), d});
  for (const auto& g : graphs) {
    const auto it = by_id.find(g.sample_id);
    if (it == by_id.end()) {
      run.summary.diagnostics.push_back({g.sample_id, "no reference record"});
      continue;
    }
    try {
      run.report.merge(coincidence(g, reference_graph(*it->second), options));
      ++run.summary.processed;
    } catch (const Error& e) {
      run.summary.diagnostics.push_back({g.sample_id, e.what()});
    }
  }

  auto stream = detail::open_output(out);
  stream << "reference_type,reference_count,recovered_count,proportion\n";
  for (const auto& [type, c] : run.report.by_type) {
    stream << fmt::format("{},{},{},{:.6f}\n", detail::csv_field(type), c.reference_count, c.recovered_count,
                          c.proportion());
  }
  if (log != nullptr) {
    *log << "extracted edges: " << run.report.extracted_edges
         << ", matching no reference edge: " << run.report.unique_extracted_count << '\n';
  }
  detail::warn(log, run.summary.diagnostics);
  return run;
}

/// Writes task records whose edges come from the extracted graphs (or, with
/// `sequence_heads` set, from a sequence-only baseline over the task tokens).
inline RunSummary run_export(const std::optional<fs::path>& graphs_path, const fs::path& reference_path,
                             const fs::path& out, std::optional<std::size_t> sequence_heads = std::nullopt,
                             const ExtractionConfig& config = {}, std::ostream* log = nullptr) {
  const auto ingest = ingest_records(reference_path);
  std::vector<ProgramGraph> graphs;
  if (sequence_heads) {
    for (const auto& r : ingest.records) graphs.push_back(sequence_baseline(r.sample_id, r.source_tokens, *sequence_heads, config));
  } else {
    if (!graphs_path) throw ArgumentError("export needs --graphs unless --baseline sequence is given");
    graphs = detail::graphs_only(read_graphs(*graphs_path));
  }
  const auto result = export_records(graphs, ingest.records);

  RunSummary summary;
  summary.inputs = graphs.size();
  summary.processed = result.lines.size();
  for (const auto& d : ingest.diagnostics) summary.diagnostics.push_back({reference_path.filename().string(), d});
  for (const auto& d : result.diagnostics) summary.diagnostics.push_back({"export", d});
  auto stream = detail::open_output(out);
  write_lines(stream, result.lines);
  detail::warn(log, summary.diagnostics);
  return summary;
}

}  // namespace attngraph
