// Small walkthrough: build an engine, stream some updates, ask questions.
#include <cstdio>

#include "sketchconn/engine.hpp"

using namespace sketchconn;

int main() {
  EngineConfig cfg;
  cfg.vertex_count = 8;
  cfg.seed = 42;
  cfg.mode = UpdateMode::kBuffered;
  cfg.buffer_capacity = 4;
  ConnectivityEngine engine(cfg);

  // two triangles joined by a bridge
  for (auto [u, v] : {Edge{0, 1}, Edge{1, 2}, Edge{0, 2}, Edge{4, 5}, Edge{5, 6}, Edge{4, 6}, Edge{2, 4}}) {
    engine.insert(u, v);
  }
  std::printf("0~6: %d\n", engine.connected(0, 6));
  std::printf("0~7: %d\n", engine.connected(0, 7));

  engine.erase(2, 4);
  std::printf("after dropping the bridge, 0~6: %d\n", engine.connected(0, 6));

  // a tree edge inside a triangle can go; the third side takes over
  engine.erase(0, 1);
  std::printf("after dropping (0,1), 0~1: %d\n", engine.connected(0, 1));

  std::printf("spanning forest:");
  for (auto [u, v] : engine.spanning_forest()) std::printf(" (%u,%u)", u, v);
  std::printf("\n");

  const auto& c = engine.counters();
  std::printf("updates %llu, isolated %llu, normal %llu\n", (unsigned long long)c.updates,
              (unsigned long long)c.isolated_updates, (unsigned long long)c.normal_updates);
  const auto report = engine.check_invariants(true);
  std::printf("invariants: %s\n", report.clean() ? "clean" : report.str().c_str());
  return report.clean() ? 0 : 1;
}
