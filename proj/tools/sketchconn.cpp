#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/cfg/helpers.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "sketchconn/engine.hpp"
#include "sketchconn/metrics.hpp"
#include "sketchconn/oracle.hpp"
#include "sketchconn/stream.hpp"

using namespace sketchconn;

namespace {

struct EngineFlags {
  std::string mode = "sequential";
  std::uint32_t levels = 0;
  std::uint32_t buffer = 128;
  std::uint32_t workers = 1;
  std::uint64_t seed = 1;
  std::uint32_t columns = 7;
  std::string height = "reduced";

  void add_to(CLI::App* cmd) {
    cmd->add_option("--mode", mode, "update mode")
        ->check(CLI::IsMember({"sequential", "parallel", "buffered"}))
        ->capture_default_str();
    cmd->add_option("--levels", levels, "number of levels, 0 for the default 2*ceil(log2 V)+1")->capture_default_str();
    cmd->add_option("--buffer", buffer, "buffer capacity in buffered mode")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--seed", seed, "engine seed")->capture_default_str();
    cmd->add_option("--columns", columns, "sketch columns")->check(CLI::Range(1, 32))->capture_default_str();
    cmd->add_option("--height", height, "skip list height mode")
        ->check(CLI::IsMember({"reduced", "classic"}))
        ->capture_default_str();
  }

  EngineConfig config(std::uint64_t vertex_count) const {
    EngineConfig cfg;
    cfg.vertex_count = vertex_count;
    cfg.num_levels = levels;
    cfg.buffer_capacity = buffer;
    cfg.workers = workers;
    cfg.seed = seed;
    cfg.sketch_columns = columns;
    cfg.height_mode = height == "classic" ? HeightMode::kClassic : HeightMode::kReduced;
    cfg.mode = mode == "parallel" ? UpdateMode::kParallel : mode == "buffered" ? UpdateMode::kBuffered : UpdateMode::kSequential;
    return cfg;
  }
};

int cmd_gen(const std::string& kind, const std::string& input, std::uint32_t repeats, bool queries, std::uint64_t seed,
            const std::string& out) {
  const auto [edges, n] = read_edge_list(input);
  require_simple(edges, n);
  spdlog::info("read {} edges on {} vertices from {}", edges.size(), n, input);
  auto ops = kind == "standard" ? gen_standard_stream(edges, seed) : gen_fixed_forest_stream(edges, n, repeats, seed);
  if (queries) ops = interleave_queries(ops, n, seed + 1);
  if (const auto bad = check_legal(ops, n)) {
    spdlog::error("generated stream is illegal at op {}: {}", bad->index, bad->reason);
    return 2;
  }
  write_stream(out, n, ops);
  std::cout << "wrote " << ops.size() << " ops on " << n << " vertices to " << out << "\n";
  return 0;
}

int cmd_ingest(const std::string& path, const EngineFlags& flags, const std::string& metrics_out) {
  const auto [header, ops] = read_stream(path);
  if (const auto bad = check_legal(ops, header.vertex_count)) {
    spdlog::error("stream violation at op {}: {}", bad->index, bad->reason);
    return 2;
  }
  const auto cfg = flags.config(header.vertex_count);
  spdlog::info("ingesting {} ops, V={}, mode={}, levels={}", ops.size(), header.vertex_count, flags.mode, cfg.levels());
  const auto metrics = measure_run(cfg, ops);
  const auto doc = to_json(metrics);
  if (!metrics_out.empty()) {
    std::ofstream out(metrics_out);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + metrics_out);
    out << doc.dump(2) << "\n";
  }
  std::printf("updates %llu (%.0f/s), queries %llu (%.0f/s), isolated %llu, normal %llu, peak %.2f MB\n",
              (unsigned long long)metrics.updates, metrics.updates_per_second(), (unsigned long long)metrics.queries,
              metrics.queries_per_second(), (unsigned long long)metrics.isolated_update_count,
              (unsigned long long)metrics.normal_update_count, metrics.peak_memory_bytes / 1e6);
  return 0;
}

int cmd_verify(const std::string& path, const EngineFlags& flags, bool legal_only, bool check_invariants, bool inject_fault,
               bool force) {
  const auto [header, ops] = read_stream(path);
  const auto n = header.vertex_count;
  nlohmann::json report{{"ops", ops.size()}, {"vertex_count", n}};
  const auto bad = check_legal(ops, n);
  report["legal"] = !bad;
  if (bad) report["violation"] = {{"index", bad->index}, {"reason", bad->reason}};
  bool ok = !bad;
  if (!legal_only && ok) {
    if (n > 4096 && !force) {
      spdlog::error("V={} exceeds the 4096 vertex guard; pass --force to verify anyway", n);
      return 2;
    }
    auto cfg = flags.config(n);
    cfg.fault_drop_links = inject_fault;
    ConnectivityEngine engine(cfg);
    ShadowGraph oracle(n);
    std::uint64_t queries = 0;
    std::uint64_t mismatches = 0;
    std::optional<std::size_t> first_mismatch;
    std::optional<std::pair<std::size_t, std::string>> first_violation;
    for (std::size_t i = 0; i < ops.size(); ++i) {
      const auto& op = ops[i];
      const auto answer = engine.apply(op);
      if (answer) {
        ++queries;
        if (*answer != oracle.connected(op.u, op.v)) {
          ++mismatches;
          if (!first_mismatch) first_mismatch = i;
        }
        continue;
      }
      oracle.apply(op);
      if (check_invariants && !first_violation) {
        const auto inv = engine.check_invariants();
        if (!inv.clean()) first_violation = {i, inv.str()};
      }
    }
    if (check_invariants && !first_violation) {
      const auto inv = engine.check_invariants(true);
      if (!inv.clean()) first_violation = {ops.size(), inv.str()};
    }
    report["queries"] = queries;
    report["mismatches"] = mismatches;
    if (first_mismatch) report["first_mismatch"] = *first_mismatch;
    report["invariants_checked"] = check_invariants;
    if (first_violation) report["first_violation"] = {{"index", first_violation->first}, {"detail", first_violation->second}};
    ok = mismatches == 0 && !first_violation;
  }
  report["pass"] = ok;
  std::cout << report.dump(2) << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* level = std::getenv("SKETCHCONN_LOG")) {
    spdlog::cfg::helpers::load_levels(level);
  } else {
    spdlog::set_level(spdlog::level::warn);
  }
  spdlog::set_default_logger(spdlog::default_logger()->clone("sketchconn"));

  CLI::App app{"Sketch-based fully dynamic connectivity"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "generate an update stream from an edge list");
  std::string kind = "standard";
  std::string input;
  std::string out;
  std::uint32_t repeats = 20;
  bool queries = false;
  std::uint64_t gen_seed = 1;
  gen->add_option("kind", kind, "stream recipe")->required()->check(CLI::IsMember({"standard", "fixed-forest"}));
  gen->add_option("input", input, "edge list, one 'u v' pair per line")->required()->check(CLI::ExistingFile);
  gen->add_option("--repeats", repeats, "delete/reinsert rounds for fixed-forest")->capture_default_str();
  gen->add_flag("--queries", queries, "interleave query bursts");
  gen->add_option("--seed", gen_seed, "generator seed")->capture_default_str();
  gen->add_option("--out,-o", out, "output stream file")->required();

  EngineFlags flags;
  auto* ingest = app.add_subcommand("ingest", "run a stream through the engine and report metrics");
  std::string stream;
  std::string metrics_out;
  ingest->add_option("stream", stream, "binary stream file")->required()->check(CLI::ExistingFile);
  ingest->add_option("--metrics-out", metrics_out, "write metrics JSON here");
  flags.add_to(ingest);

  auto* verify = app.add_subcommand("verify", "check a stream against a brute-force oracle");
  bool legal_only = false;
  bool check_inv = false;
  bool inject_fault = false;
  bool force = false;
  verify->add_option("stream", stream, "binary stream file")->required()->check(CLI::ExistingFile);
  verify->add_flag("--legal-only", legal_only, "only check stream legality");
  verify->add_flag("--check-invariants", check_inv, "check engine invariants after every update");
  verify->add_flag("--inject-fault", inject_fault, "drop every link (testing the checker)");
  verify->add_flag("--force", force, "allow V > 4096");
  flags.add_to(verify);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen) return cmd_gen(kind, input, repeats, queries, gen_seed, out);
    if (*ingest) return cmd_ingest(stream, flags, metrics_out);
    return cmd_verify(stream, flags, legal_only, check_inv, inject_fault, force);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
}
