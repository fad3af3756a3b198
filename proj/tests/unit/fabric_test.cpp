#include <doctest.h>

#include <map>
#include <set>

#include "rejuv/fabric/bus.hpp"
#include "rejuv/fabric/fabric.hpp"
#include "rejuv/sim/error.hpp"

using namespace rejuv;
using namespace rejuv::fabric;

namespace {

SoftcoreTemplate make_template(const std::string& id, std::uint64_t size = 1000) {
  return SoftcoreTemplate{id, "riscv", size, 200, 50};
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return Errc::kIo;
}

}  // namespace

TEST_CASE("template library rejects duplicates and zero parameters") {
  TemplateLibrary lib;
  CHECK(lib.add(make_template("a")).value == 0);
  CHECK(lib.add(make_template("b")).value == 1);
  CHECK(code_of([&] { lib.add(make_template("a")); }) == Errc::kDuplicateTemplate);
  CHECK(code_of([&] { lib.add(make_template("c", 0)); }) == Errc::kInvalidConfig);
  CHECK(code_of([&] { lib.at(TemplateIndex{7}); }) == Errc::kUnknownTemplate);
  CHECK(lib.find("b")->value == 1);
  CHECK_FALSE(lib.find("zz"));
}

TEST_CASE("port latency is the bitstream size over bandwidth, rounded up") {
  ReconfigPort port{PortKind::kPcap, 20, 0};
  CHECK(port.latency_for(1000) == 50);
  CHECK(port.latency_for(1001) == 51);
  CHECK(port.latency_for(1) == 1);
  port.bandwidth = 100;
  CHECK(port.latency_for(1000) == 10);
}

TEST_CASE("spawn schedules completion at the port latency") {
  sim::Engine engine(1);
  Fabric fabric(engine, 4, 20, 100);
  fabric.register_template(make_template("a"));
  const TileId icap_tile = fabric.spawn_tile(TemplateIndex{0}, PortKind::kIcap);
  const TileId pcap_tile = fabric.spawn_tile(TemplateIndex{0}, PortKind::kPcap);
  CHECK(fabric.tile(icap_tile).ready_at == 10);
  CHECK(fabric.tile(pcap_tile).ready_at == 50);
  CHECK(fabric.tile(icap_tile).lifecycle == Lifecycle::kSpawning);

  std::vector<std::pair<Tick, std::uint64_t>> completions;
  engine.run_until(100, [&](const sim::SimEvent& e) {
    if (e.kind == sim::EventKind::kSpawnComplete) {
      completions.emplace_back(e.at, e.ref);
      fabric.complete_spawn(TileId{static_cast<std::uint32_t>(e.ref)});
    }
  });
  REQUIRE(completions.size() == 2);
  CHECK(completions[0] == std::pair<Tick, std::uint64_t>{10, icap_tile.value});
  CHECK(completions[1] == std::pair<Tick, std::uint64_t>{50, pcap_tile.value});
  CHECK(fabric.tile(icap_tile).active_at == 10);
  CHECK(fabric.alive_count() == 2);
}

TEST_CASE("concurrent spawns on one port queue first-in first-out") {
  sim::Engine engine(1);
  Fabric fabric(engine, 4, 20, 100);
  fabric.register_template(make_template("a"));
  fabric.register_template(make_template("b", 450));
  const TileId first = fabric.spawn_tile(TemplateIndex{0}, PortKind::kIcap);
  const TileId second = fabric.spawn_tile(TemplateIndex{1}, PortKind::kIcap);
  const TileId third = fabric.spawn_tile(TemplateIndex{0}, PortKind::kIcap);
  CHECK(fabric.tile(first).ready_at == 10);
  CHECK(fabric.tile(second).ready_at == 15);
  CHECK(fabric.tile(third).ready_at == 25);
  // The other port is independent.
  const TileId other = fabric.spawn_tile(TemplateIndex{0}, PortKind::kPcap);
  CHECK(fabric.tile(other).ready_at == 50);
}

TEST_CASE("a spawning tile holds its pblock and slot counts are conserved") {
  sim::Engine engine(1);
  Fabric fabric(engine, 3, 20, 100);
  fabric.register_template(make_template("a"));
  std::vector<TileId> tiles;
  for (int i = 0; i < 3; ++i) {
    tiles.push_back(fabric.spawn_tile(TemplateIndex{0}, PortKind::kIcap));
    std::uint32_t occupied = 0;
    for (std::uint32_t p = 0; p < fabric.pblock_count(); ++p) {
      if (fabric.occupant(PblockId{p})) ++occupied;
    }
    CHECK(occupied + fabric.free_pblocks() == fabric.pblock_count());
  }
  CHECK(fabric.free_pblocks() == 0);
  CHECK(code_of([&] { fabric.spawn_tile(TemplateIndex{0}, PortKind::kIcap); }) ==
        Errc::kNoFreePblock);

  std::set<std::uint32_t> pblocks;
  for (TileId t : tiles) pblocks.insert(fabric.tile(t).pblock.value);
  CHECK(pblocks.size() == 3);

  engine.run_until(100, [&](const sim::SimEvent& e) {
    if (e.kind == sim::EventKind::kSpawnComplete) {
      fabric.complete_spawn(TileId{static_cast<std::uint32_t>(e.ref)});
    }
  });
  fabric.destroy_tile(tiles[1], sim::DestroyReason::kManual);
  CHECK(fabric.free_pblocks() == 1);
  CHECK_FALSE(fabric.occupant(fabric.tile(tiles[1]).pblock));
  const TileId reuse = fabric.spawn_tile(TemplateIndex{0}, PortKind::kIcap);
  CHECK(fabric.tile(reuse).pblock == fabric.tile(tiles[1]).pblock);
}

TEST_CASE("lifecycle transitions are enforced") {
  sim::Engine engine(1);
  Fabric fabric(engine, 2, 20, 100);
  CHECK(code_of([&] { fabric.spawn_tile(TemplateIndex{0}, PortKind::kIcap); }) == Errc::kNoTemplate);
  fabric.register_template(make_template("a"));
  const TileId tile = fabric.spawn_tile(TemplateIndex{0}, PortKind::kIcap);
  CHECK(code_of([&] { fabric.retire(tile); }) == Errc::kInvalidLifecycle);
  CHECK(code_of([&] { fabric.destroy_tile(tile, sim::DestroyReason::kManual); }) ==
        Errc::kInvalidLifecycle);
  CHECK(code_of([&] { fabric.mark_compromised(tile); }) == Errc::kInvalidLifecycle);
  CHECK(code_of([&] { fabric.tile(TileId{9}); }) == Errc::kUnknownTile);
  CHECK(code_of([&] { fabric.tile(TileId{0}); }) == Errc::kUnknownTile);

  engine.run_until(10, [&](const sim::SimEvent&) { fabric.complete_spawn(tile); });
  CHECK(code_of([&] { fabric.complete_spawn(tile); }) == Errc::kInvalidLifecycle);
  fabric.mark_compromised(tile);
  CHECK(fabric.compromised_alive() == 1);
  fabric.retire(tile);
  CHECK(fabric.tile(tile).alive());
  CHECK(fabric.compromised_alive() == 1);
  fabric.destroy_tile(tile, sim::DestroyReason::kRejuvenation);
  CHECK(fabric.tile(tile).lifecycle == Lifecycle::kDestroyed);
  CHECK(fabric.tile(tile).health == Health::kCorrect);
  CHECK(fabric.compromised_alive() == 0);
  CHECK(code_of([&] { fabric.destroy_tile(tile, sim::DestroyReason::kManual); }) ==
        Errc::kAlreadyDestroyed);
}

TEST_CASE("zero port bandwidth is rejected") {
  sim::Engine engine(1);
  CHECK(code_of([&] { Fabric(engine, 2, 0, 100); }) == Errc::kInvalidConfig);
}

TEST_CASE("bus delivers every message once within the delay bounds") {
  sim::Engine engine(3);
  Fabric fabric(engine, 2, 20, 100);
  Bus bus(engine, fabric, BusModel{2, 5, 1000});
  std::map<std::uint64_t, Tick> sent_at;
  std::map<std::uint64_t, int> delivered;
  engine.schedule(0, sim::EventKind::kTimer, 0);
  engine.run_until(1000, [&](const sim::SimEvent& e) {
    if (e.kind == sim::EventKind::kTimer) {
      for (int i = 0; i < 200; ++i) {
        Message m;
        m.type = sim::MsgType::kResponse;
        m.words = {static_cast<std::uint64_t>(i), 42, 0, 0};
        sent_at[bus.send(m)] = engine.now();
      }
      return;
    }
    const auto msg = bus.deliver(e.ref);
    REQUIRE(msg);
    CHECK(msg->words[1] == 42);
    const Tick delay = engine.now() - sent_at.at(msg->id);
    CHECK(delay >= 2);
    CHECK(delay <= 5);
    ++delivered[msg->id];
  });
  CHECK(delivered.size() == 200);
  for (const auto& [id, count] : delivered) CHECK(count == 1);
  CHECK(bus.in_flight() == 0);
}

TEST_CASE("bus turns deliveries to a destroyed tile into drops") {
  sim::Engine engine(3);
  Fabric fabric(engine, 2, 20, 100);
  fabric.register_template(make_template("a"));
  Bus bus(engine, fabric, BusModel{1, 1, 1000});
  const TileId tile = fabric.spawn_tile(TemplateIndex{0}, PortKind::kIcap);
  bool dropped = false;
  engine.run_until(100, [&](const sim::SimEvent& e) {
    if (e.kind == sim::EventKind::kSpawnComplete) {
      fabric.complete_spawn(tile);
      Message m;
      m.to = actor_of(tile);
      m.type = sim::MsgType::kExecute;
      bus.send(m);
      fabric.destroy_tile(tile, sim::DestroyReason::kManual);
    } else if (e.kind == sim::EventKind::kDeliver) {
      dropped = !bus.deliver(e.ref).has_value();
      CHECK(engine.current().kind == sim::RecordKind::kDrop);
    }
  });
  CHECK(dropped);
}

TEST_CASE("bus rejects inverted delay bounds and zero state bandwidth") {
  sim::Engine engine(1);
  Fabric fabric(engine, 1, 20, 100);
  CHECK(code_of([&] { Bus(engine, fabric, BusModel{5, 2, 1000}); }) == Errc::kInvalidConfig);
  CHECK(code_of([&] { Bus(engine, fabric, BusModel{1, 2, 0}); }) == Errc::kInvalidConfig);
  CHECK(BusModel{3, 3, 1}.mode() == Synchrony::kSynchronous);
  CHECK(BusModel{1, 3, 1}.mode() == Synchrony::kPartiallySynchronous);
}
