#include <gtest/gtest.h>

#include "falconmeta/index/exception_table.h"
#include "falconmeta/index/ring.h"
#include "falconmeta/index/route.h"
#include "falconmeta/model/dentry_codec.h"
#include "falconmeta/model/path.h"
#include "falconmeta/rpc/messages.h"

namespace falconmeta {
namespace {

TEST(Path, ParsesAbsolutePaths) {
  auto p = PathName::Parse("/a/b/c.txt");
  ASSERT_TRUE(p.ok());
  EXPECT_EQ(p->depth(), 3u);
  EXPECT_EQ(p->leaf(), "c.txt");
  EXPECT_EQ(p->Parent().Render(), "/a/b");
  EXPECT_TRUE(PathName::Parse("/")->is_root());
  EXPECT_TRUE(PathName::Parse("/a")->IsPrefixOf(*p));
  EXPECT_FALSE(PathName::Parse("/a/bb")->IsPrefixOf(*p));
}

TEST(Path, RejectsMalformed) {
  for (const char* bad : {"", "a/b", "/a//b", "/a/", "/a/./b", "/a/../b"}) {
    auto p = PathName::Parse(bad);
    ASSERT_FALSE(p.ok()) << bad;
    EXPECT_EQ(p.status().code(), Code::kMalformedPath) << bad;
  }
  EXPECT_FALSE(PathName::Parse("/" + std::string(256, 'x')).ok());
  EXPECT_TRUE(PathName::Parse("/" + std::string(255, 'x')).ok());
}

TEST(Permission, ModeBits) {
  Permission p{0750, 10, 20};
  EXPECT_TRUE(CheckPermission(p, {10, 99}, Access::kWrite));
  EXPECT_TRUE(CheckPermission(p, {11, 20}, Access::kExec));
  EXPECT_FALSE(CheckPermission(p, {11, 20}, Access::kWrite));
  EXPECT_FALSE(CheckPermission(p, {11, 21}, Access::kRead));
  EXPECT_TRUE(CheckPermission(p, {0, 0}, Access::kWrite));
}

TEST(DentryCodec, RoundTripsBitExact) {
  DentryRecord d;
  d.key = DentryKey{DirectoryId(0x0102030405060708), "name"};
  d.dir_id = DirectoryId(0x1112131415161718);
  d.perm = Permission{0755, 0x21222324, 0x31323334};
  d.state = DentryState::kInvalid;
  Bytes b = EncodeDentry(d);
  ASSERT_EQ(b.size(), kDentryHeaderBytes + 4);
  EXPECT_EQ(b[0], 0x08);
  EXPECT_EQ(b[7], 0x01);
  EXPECT_EQ(b[8], 0x18);
  EXPECT_EQ(b[16], 0x24);
  EXPECT_EQ(b[24], 0xed);  // 0755 low byte
  EXPECT_EQ(b[26], 1);     // state
  EXPECT_EQ(b[27], 4);     // name length
  auto back = DecodeDentry(b);
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(*back, d);
}

TEST(DentryCodec, RejectsBadInput) {
  DentryRecord d;
  d.key.name = "x";
  Bytes b = EncodeDentry(d);
  EXPECT_FALSE(DecodeDentry(std::span(b).first(b.size() - 1)).ok());
  Bytes extra = b;
  extra.push_back(0);
  EXPECT_FALSE(DecodeDentry(extra).ok());
  Bytes state = b;
  state[26] = 7;
  EXPECT_FALSE(DecodeDentry(state).ok());
}

TEST(Ring, BuildValidatesNodes) {
  EXPECT_EQ(Ring::Build({}).status().code(), Code::kEmptyCluster);
  EXPECT_FALSE(Ring::Build({NodeId(1), NodeId(1)}).ok());
  auto r = Ring::Build({NodeId(2), NodeId(0), NodeId(1)});
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->nodes(), (std::vector<NodeId>{NodeId(0), NodeId(1), NodeId(2)}));
  double sum = 0;
  for (const auto& [n, s] : r->Coverage()) sum += s;
  EXPECT_NEAR(sum, 1.0, 1e-9);
}

TEST(Ring, AddingNodeOnlyMovesNamesToIt) {
  Ring r4 = *Ring::Build({NodeId(0), NodeId(1), NodeId(2), NodeId(3)});
  Ring r5 = *Ring::Build({NodeId(0), NodeId(1), NodeId(2), NodeId(3), NodeId(4)});
  for (int i = 0; i < 2000; ++i) {
    std::string name = "n" + std::to_string(i);
    NodeId a = OwnerByName(r4, name), b = OwnerByName(r5, name);
    if (a != b) EXPECT_EQ(b, NodeId(4)) << name;
  }
}

TEST(ExceptionTable, EncodeDecodeAndVersioning) {
  ExceptionTable t = ExceptionTable{}
                         .With({"Makefile", RedirectRule::kPathWalk, NodeId(0)})
                         .With({"Kconfig", RedirectRule::kOverride, NodeId(3)})
                         .WithVersion(5);
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(t.CountRule(RedirectRule::kOverride), 1u);
  Bytes b = t.Encode();
  ByteReader r(b);
  ExceptionTable back = ExceptionTable::DecodeFrom(r);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(back, t);
  ExceptionTable older = t.Without("Kconfig").WithVersion(4);
  EXPECT_EQ(&ApplyTableUpdate(t, older), &t);
  EXPECT_EQ(&ApplyTableUpdate(older, t), &t);
}

TEST(Route, FollowsTableRules) {
  Ring ring = *Ring::Build({NodeId(0), NodeId(1), NodeId(2), NodeId(3)});
  ExceptionTable t = ExceptionTable{}
                         .With({"Makefile", RedirectRule::kPathWalk, NodeId(0)})
                         .With({"Kconfig", RedirectRule::kOverride, NodeId(2)})
                         .WithVersion(1);
  auto route = [&](const char* p) { return Route(ring, t, *PathName::Parse(p)); };
  EXPECT_EQ(route("/x/Kconfig"), (RouteDecision{RouteDecision::Kind::kOverride, NodeId(2)}));
  EXPECT_EQ(route("/x/Makefile").kind, RouteDecision::Kind::kRandomThenWalk);
  EXPECT_EQ(route("/x/README"), (RouteDecision{RouteDecision::Kind::kDirect, OwnerByName(ring, "README")}));
  EXPECT_EQ(PlacementOwner(ring, t, DirectoryId(5), "Makefile"), OwnerByNameAndParent(ring, "Makefile", DirectoryId(5)));
  // An override target outside the ring falls back to hashing.
  ExceptionTable gone = t.With({"Kconfig", RedirectRule::kOverride, NodeId(9)});
  EXPECT_EQ(PlacementOwner(ring, gone, DirectoryId(5), "Kconfig"), OwnerByName(ring, "Kconfig"));
}

TEST(Messages, RoundTrip) {
  rpc::Message m;
  m.req_id = 42;
  m.table_version = 7;
  rpc::MetaRequest req;
  req.op = rpc::MetaOp::kClose;
  req.path = "/a/b";
  req.caller = {100, 200};
  req.size = 12345;
  req.hops = 1;
  req.reply_to = 10001;
  m.body = req;
  auto back = rpc::Decode(rpc::Encode(m));
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(back->req_id, 42u);
  EXPECT_EQ(back->table_version, 7u);
  const auto& got = std::get<rpc::MetaRequest>(back->body);
  EXPECT_EQ(got.path, "/a/b");
  EXPECT_EQ(got.size, 12345u);
  EXPECT_EQ(got.caller.uid, 100u);
  EXPECT_FALSE(back->is_reply());
}

TEST(Messages, RejectsTruncated) {
  rpc::Message m;
  m.body = rpc::LookupRequest{};
  Bytes b = rpc::Encode(m);
  EXPECT_FALSE(rpc::Decode(std::span(b).first(b.size() - 1)).ok());
  b[0] = 0xff;
  EXPECT_FALSE(rpc::Decode(b).ok());
}

}  // namespace
}  // namespace falconmeta
