// attngraph: program graphs from code-model attention.
//
//   attngraph extract <attn_dir> --out graphs.jsonl
//   attngraph profile <attn_dir> --out layers.csv
//   attngraph eval-cst --graphs graphs.jsonl --out-prefix reports/cst_
//   attngraph head-stats --graphs graphs.jsonl --out heads.csv
//   attngraph coincide --graphs graphs.jsonl --reference task.jsonl --out coincide.csv
//   attngraph export --graphs graphs.jsonl --reference task.jsonl --out records.jsonl
//
// Extraction options (--layer, --reduction, --mode, --root, --sequence-edges,
// --mask-symbols, --workers) may also come from a key=value file given with
// --config; flags on the command line win.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "attngraph/attngraph.hpp"

namespace {

struct SharedOptions {
  std::string layer = "last";
  std::string reduction = "max";
  std::string mode = "arborescence";
  std::string root = "first";
  bool sequence_edges = true;
  bool sequence_across_masks = false;
  std::string mask_symbols = "#NEWLINE#,#INDENT#,#DEDENT#";
  std::size_t workers = 1;

  attngraph::ExtractionConfig config() const {
    attngraph::ExtractionConfig c;
    if (layer != "last") {
      try {
        c.layer = std::stoul(layer);
      } catch (const std::exception&) {
        throw attngraph::ArgumentError("--layer must be 'last' or a layer number, got '" + layer + "'");
      }
    }
    c.reduction = attngraph::parse_reduction(reduction);
    c.mode = attngraph::parse_extraction_mode(mode);
    c.root = attngraph::RootPolicy::parse(root);
    c.sequence_edges = sequence_edges;
    c.sequence_across_masks = sequence_across_masks;
    c.mask_symbols.clear();
    std::stringstream ss(mask_symbols);
    for (std::string symbol; std::getline(ss, symbol, ',');) {
      if (!symbol.empty()) c.mask_symbols.insert(symbol);
    }
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extract and evaluate program graphs from code-model attention"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file with extraction options");

  SharedOptions shared;
  app.add_option("--layer", shared.layer, "layer to extract from (1-based) or 'last'")->capture_default_str();
  app.add_option("--reduction", shared.reduction, "subword-to-word reduction: max | mean")->capture_default_str();
  app.add_option("--mode", shared.mode, "arborescence | symmetric-mst")->capture_default_str();
  app.add_option("--root", shared.root, "root word: 'first' or an index")->capture_default_str();
  app.add_option("--sequence-edges", shared.sequence_edges, "add sequence edges (true/false)")->capture_default_str();
  app.add_option("--sequence-across-masks", shared.sequence_across_masks,
                 "join sequence edges across masked tokens")
      ->capture_default_str();
  app.add_option("--mask-symbols", shared.mask_symbols, "comma-separated format symbols to mask")
      ->capture_default_str();
  app.add_option("--workers", shared.workers, "worker threads")
      ->envname("ATTNGRAPH_WORKERS")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  std::string attn_dir;
  std::string out;

  auto* extract = app.add_subcommand("extract", "build one graph per ATTN1 file");
  extract->add_option("attn_dir", attn_dir, "directory of ATTN1 files")->required()->check(CLI::ExistingDirectory);
  extract->add_option("--out", out, "graph JSONL output (manifest written alongside)")->required();

  auto* profile = app.add_subcommand("profile", "per-layer diagonality CSV");
  profile->add_option("attn_dir", attn_dir, "directory of ATTN1 files")->required()->check(CLI::ExistingDirectory);
  profile->add_option("--out", out, "CSV output")->required();

  std::string graphs;
  std::string sources;
  std::string prefix;
  std::size_t top = attngraph::kTopParentTypes;
  auto* eval_cst = app.add_subcommand("eval-cst", "tree/sequence distance and parent-type reports");
  eval_cst->add_option("--graphs", graphs, "graph JSONL")->required()->check(CLI::ExistingFile);
  eval_cst->add_option("--sources", sources, "JSONL of {sample_id, source_text}")->check(CLI::ExistingFile);
  eval_cst->add_option("--out-prefix", prefix, "prefix for the CSV reports")->required();
  eval_cst->add_option("--top", top, "parent types to report")->capture_default_str();

  std::string queries;
  auto* head_stats = app.add_subcommand("head-stats", "token-pair edges per attention head");
  head_stats->add_option("--graphs", graphs, "graph JSONL")->required()->check(CLI::ExistingFile);
  head_stats->add_option("--queries", queries, "CSV name,src,dst[,symmetric]; default self-self and def-return")
      ->check(CLI::ExistingFile);
  head_stats->add_option("--out", out, "CSV output")->required();

  std::string reference;
  bool include_sequence = false;
  auto* coincide = app.add_subcommand("coincide", "overlap with rule-based reference graphs");
  coincide->add_option("--graphs", graphs, "graph JSONL")->required()->check(CLI::ExistingFile);
  coincide->add_option("--reference", reference, "task records JSONL")->required()->check(CLI::ExistingFile);
  coincide->add_option("--out", out, "CSV output")->required();
  coincide->add_flag("--include-sequence", include_sequence, "count sequence edges as extracted edges");

  std::string baseline;
  std::size_t heads = 12;
  auto* export_cmd = app.add_subcommand("export", "task records with extracted graphs as edges");
  export_cmd->add_option("--graphs", graphs, "graph JSONL")->check(CLI::ExistingFile);
  export_cmd->add_option("--reference", reference, "task records JSONL")->required()->check(CLI::ExistingFile);
  export_cmd->add_option("--out", out, "records JSONL output")->required();
  export_cmd->add_option("--baseline", baseline, "'sequence' for the sequence-only baseline")
      ->check(CLI::IsMember({"sequence"}));
  export_cmd->add_option("--heads", heads, "head count for baseline type numbering")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    const auto config = shared.config();
    attngraph::RunSummary summary;
    if (*extract) {
      summary = attngraph::run_extract(attn_dir, out, config, shared.workers, &std::cerr);
      std::cerr << "processed " << summary.processed << " of " << summary.inputs << " inputs\n";
    } else if (*profile) {
      summary = attngraph::run_profile(attn_dir, out, config.reduction, shared.workers, &std::cerr);
    } else if (*eval_cst) {
      std::optional<std::filesystem::path> src;
      if (!sources.empty()) src = sources;
      summary = attngraph::run_eval_cst(graphs, src, prefix, top, &std::cerr).summary;
    } else if (*head_stats) {
      const auto q = queries.empty() ? attngraph::default_pair_queries() : attngraph::read_queries(queries);
      summary = attngraph::run_head_stats(graphs, q, out, &std::cerr);
    } else if (*coincide) {
      summary = attngraph::run_coincide(graphs, reference, out, {include_sequence}, &std::cerr).summary;
    } else if (*export_cmd) {
      std::optional<std::filesystem::path> g;
      if (!graphs.empty()) g = graphs;
      std::optional<std::size_t> seq;
      if (baseline == "sequence") seq = heads;
      summary = attngraph::run_export(g, reference, out, seq, config, &std::cerr);
    }
    if (summary.processed == 0) std::cerr << "error: no samples processed\n";
    return summary.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
