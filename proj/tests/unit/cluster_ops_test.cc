#include <gtest/gtest.h>

#include "falconmeta/cluster/cluster.h"

namespace falconmeta {
namespace {

ClusterConfig SmallCluster(uint32_t n = 4) {
  ClusterConfig c;
  c.mnodes = n;
  c.data_nodes = 3;
  c.clients = 2;
  c.sim.seed = 7;
  return c;
}

TEST(ClusterOps, MkdirCreateGetattr) {
  Cluster cl(SmallCluster());
  auto r = cl.Await(0, cl.client(0).Mkdir("/a", 0755));
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, Code::kOk);
  r = cl.Await(0, cl.client(0).Mkdir("/a/b", 0755));
  EXPECT_EQ(r->status, Code::kOk);
  r = cl.Await(0, cl.client(0).Create("/a/b/f", 0644));
  EXPECT_EQ(r->status, Code::kOk);
  r = cl.Await(1, cl.client(1).GetAttr("/a/b/f"));
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, Code::kOk);
  ASSERT_TRUE(r->inode);
  EXPECT_FALSE(r->inode->is_dir());
  r = cl.Await(1, cl.client(1).Create("/a/b/f", 0644));
  EXPECT_EQ(r->status, Code::kExist);
  r = cl.Await(1, cl.client(1).GetAttr("/a/x/f"));
  EXPECT_EQ(r->status, Code::kNoEnt);
  r = cl.Await(1, cl.client(1).Create("/a/b/f/g", 0644));
  EXPECT_EQ(r->status, Code::kNotDir);
  CensusReport census = cl.Census();
  EXPECT_TRUE(census.ok());
  EXPECT_EQ(census.by_path.size(), 3u);
  EXPECT_TRUE(census.misplaced.empty());
}

TEST(ClusterOps, ReaddirMergesShards) {
  Cluster cl(SmallCluster());
  ASSERT_EQ(cl.Await(0, cl.client(0).Mkdir("/d", 0755))->status, Code::kOk);
  for (int i = 0; i < 20; ++i) {
    ASSERT_EQ(cl.Await(0, cl.client(0).Create("/d/f" + std::to_string(i), 0644))->status, Code::kOk);
  }
  auto r = cl.Await(1, cl.client(1).Readdir("/d"));
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, Code::kOk);
  EXPECT_EQ(r->entries.size(), 20u);
  r = cl.Await(1, cl.client(1).Readdir("/"));
  EXPECT_EQ(r->entries.size(), 1u);
}

TEST(ClusterOps, RmdirAndNotEmpty) {
  Cluster cl(SmallCluster());
  auto& c = cl.client(0);
  ASSERT_EQ(cl.Await(0, c.Mkdir("/a", 0755))->status, Code::kOk);
  ASSERT_EQ(cl.Await(0, c.Mkdir("/a/b", 0755))->status, Code::kOk);
  ASSERT_EQ(cl.Await(0, c.Create("/a/b/c", 0644))->status, Code::kOk);
  EXPECT_EQ(cl.Await(0, c.Rmdir("/a/b"))->status, Code::kNotEmpty);
  EXPECT_EQ(cl.Await(0, c.Unlink("/a/b/c"))->status, Code::kOk);
  EXPECT_EQ(cl.Await(0, c.Rmdir("/a/b"))->status, Code::kOk);
  EXPECT_EQ(cl.Await(1, cl.client(1).Create("/a/b/c", 0644))->status, Code::kNoEnt);
  EXPECT_EQ(cl.Await(0, c.Rmdir("/a/b"))->status, Code::kNoEnt);
  EXPECT_TRUE(cl.Census().ok());
}

TEST(ClusterOps, RenameFileAndDirectory) {
  Cluster cl(SmallCluster());
  auto& c = cl.client(0);
  ASSERT_EQ(cl.Await(0, c.Mkdir("/a", 0755))->status, Code::kOk);
  ASSERT_EQ(cl.Await(0, c.Mkdir("/b", 0755))->status, Code::kOk);
  ASSERT_EQ(cl.Await(0, c.Mkdir("/a/sub", 0755))->status, Code::kOk);
  ASSERT_EQ(cl.Await(0, c.Create("/a/sub/x", 0644))->status, Code::kOk);
  ASSERT_EQ(cl.Await(0, c.Create("/a/f", 0644))->status, Code::kOk);
  EXPECT_EQ(cl.Await(0, c.Rename("/a/f", "/b/g"))->status, Code::kOk);
  EXPECT_EQ(cl.Await(1, cl.client(1).GetAttr("/a/f"))->status, Code::kNoEnt);
  EXPECT_EQ(cl.Await(1, cl.client(1).GetAttr("/b/g"))->status, Code::kOk);
  // Resolve through /a/sub first so that replicas cache it.
  EXPECT_EQ(cl.Await(1, cl.client(1).GetAttr("/a/sub/x"))->status, Code::kOk);
  EXPECT_EQ(cl.Await(0, c.Rename("/a/sub", "/b/sub2"))->status, Code::kOk);
  EXPECT_EQ(cl.Await(1, cl.client(1).GetAttr("/a/sub/x"))->status, Code::kNoEnt);
  EXPECT_EQ(cl.Await(1, cl.client(1).GetAttr("/b/sub2/x"))->status, Code::kOk);
  EXPECT_EQ(cl.Await(0, c.Rename("/b", "/b/sub2/z"))->status, Code::kInvalidRename);
  EXPECT_EQ(cl.Await(0, c.Rename("/nope", "/b/q"))->status, Code::kNoEnt);
  CensusReport census = cl.Census();
  EXPECT_TRUE(census.ok());
  EXPECT_TRUE(census.by_path.contains("/b/sub2/x"));
  EXPECT_TRUE(census.misplaced.empty());
}

TEST(ClusterOps, SetPermRevokesTraversal) {
  Cluster cl(SmallCluster());
  auto& root = cl.client(0);
  cl.client(1).set_creds(Credentials{100, 100});
  ASSERT_EQ(cl.Await(0, root.Mkdir("/p", 0755))->status, Code::kOk);
  ASSERT_EQ(cl.Await(0, root.Create("/p/f", 0644))->status, Code::kOk);
  EXPECT_EQ(cl.Await(1, cl.client(1).GetAttr("/p/f"))->status, Code::kOk);
  EXPECT_EQ(cl.Await(0, root.SetPerm("/p", Permission{0700, 0, 0}))->status, Code::kOk);
  EXPECT_EQ(cl.Await(1, cl.client(1).GetAttr("/p/f"))->status, Code::kAccess);
  EXPECT_EQ(cl.Await(1, cl.client(1).SetPerm("/p", Permission{0777, 0, 0}))->status, Code::kAccess);
}

TEST(ClusterOps, FileDataRoundTrip) {
  ClusterConfig cfg = SmallCluster();
  cfg.chunk_bytes = 4096;
  Cluster cl(cfg);
  auto& c = cl.client(0);
  ASSERT_EQ(cl.Await(0, c.Create("/f", 0644))->status, Code::kOk);
  auto h = cl.Await(0, c.Open("/f"));
  ASSERT_TRUE(h && h->ok());
  Bytes data(9000);
  for (size_t i = 0; i < data.size(); ++i) data[i] = static_cast<uint8_t>(i * 7);
  EXPECT_EQ(cl.Await(0, c.Write(**h, data, 5))->status, Code::kOk);
  auto h2 = cl.Await(0, c.Open("/f"));
  ASSERT_TRUE(h2 && h2->ok());
  EXPECT_EQ((*h2)->size, 9000u);
  auto rd = cl.Await(0, c.Read(**h2));
  EXPECT_EQ(rd->status, Code::kOk);
  EXPECT_EQ(rd->data, data);
  uint64_t before = cl.sim().counters().Get("chunk.deleted");
  EXPECT_EQ(cl.Await(0, c.Unlink("/f"))->status, Code::kOk);
  EXPECT_EQ(cl.sim().counters().Get("chunk.deleted") - before, 3u);
  for (size_t i = 0; i < cl.data_node_count(); ++i) EXPECT_EQ(cl.data_node(i).ChunksOf((*h2)->inode), 0u);
}

TEST(ClusterOps, CrashRestartKeepsCommittedState) {
  Cluster cl(SmallCluster());
  auto& c = cl.client(0);
  ASSERT_EQ(cl.Await(0, c.Mkdir("/a", 0755))->status, Code::kOk);
  for (int i = 0; i < 10; ++i) ASSERT_EQ(cl.Await(0, c.Create("/a/f" + std::to_string(i), 0644))->status, Code::kOk);
  size_t before = cl.Census().by_path.size();
  for (const auto& [id, _] : cl.mnodes()) {
    cl.sim().Crash(Raw(id));
    cl.sim().Restart(Raw(id));
  }
  EXPECT_EQ(cl.Census().by_path.size(), before);
  EXPECT_EQ(cl.Await(0, c.GetAttr("/a/f3"))->status, Code::kOk);
}

}  // namespace
}  // namespace falconmeta
