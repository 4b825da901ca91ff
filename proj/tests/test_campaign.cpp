#include <gtest/gtest.h>

#include <sys/resource.h>

#include <csignal>
#include <fstream>
#include <thread>

#include "campaign_fixture.hpp"
#include "fideval/campaign.hpp"
#include "fideval/error.hpp"
#include "fideval/event_log.hpp"
#include "fideval/image_io.hpp"

using namespace fideval;
using testing_support::CampaignFixture;

namespace {

std::size_t line_count(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) n += !line.empty();
    return n;
}

Campaign::Clock fixed_clock() {
    return [] { return std::int64_t{1000}; };
}

// Answers `n` pairs for a session, always choosing left.
void answer(Campaign& c, const std::string& sid, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const auto next = c.next_pair(sid);
        ASSERT_TRUE(next.has_value());
        ASSERT_EQ(c.submit_choice(sid, next->pair_id, Choice::left).status, SubmitStatus::accepted);
    }
}

}  // namespace

TEST(Campaign, NewAnnotatorStartsAtZeroWithFullPermutation) {
    CampaignConfig cfg;
    cfg.study.methods = {"bicubic", "a", "b", "c", "d", "e", "f", "g"};
    for (int i = 0; i < 29; ++i) cfg.study.images.push_back("live" + std::to_string(i));
    testing_support::TempDir dir("campaign29");
    Campaign c(cfg, dir / "events.jsonl", fixed_clock());
    const auto s = c.start_session("alice");
    EXPECT_EQ(s.cursor, 0u);
    EXPECT_EQ(s.total, 812u);
    auto order = c.permutation_for("alice");
    std::sort(order.begin(), order.end());
    for (std::size_t i = 0; i < order.size(); ++i) ASSERT_EQ(order[i], i);
}

TEST(Campaign, ReconnectResumesWithSamePermutation) {
    CampaignFixture fx(2, {"m0", "m1", "m2", "m3"});
    Campaign c(fx.config(), fx.log_path(), fixed_clock());
    const auto s = c.start_session("bob");
    const auto perm = c.permutation_for("bob");
    answer(c, s.session_id, 5);
    const auto again = c.start_session("bob");
    EXPECT_EQ(again.session_id, s.session_id);
    EXPECT_EQ(again.cursor, 5u);
    EXPECT_EQ(c.permutation_for("bob"), perm);
    EXPECT_EQ(c.next_pair(s.session_id)->pair_id, c.pairs()[perm[5]].pair_id);
}

TEST(Campaign, DifferentAnnotatorsDifferentOrders) {
    CampaignFixture fx(3, {"m0", "m1", "m2", "m3"});
    Campaign c(fx.config(), fx.log_path(), fixed_clock());
    EXPECT_NE(c.permutation_for("ann1"), c.permutation_for("ann2"));
    EXPECT_NE(c.session_id_for("ann1"), c.session_id_for("ann2"));
}

TEST(Campaign, NextPairDoesNotAdvanceAndEndsDone) {
    CampaignFixture fx(1, {"m0", "m1", "m2"});
    Campaign c(fx.config(), fx.log_path(), fixed_clock());
    const auto s = c.start_session("carol");
    const auto first = c.next_pair(s.session_id);
    ASSERT_TRUE(first);
    EXPECT_EQ(c.next_pair(s.session_id)->pair_id, first->pair_id);
    EXPECT_EQ(first->pair_id, c.pairs()[c.permutation_for("carol")[0]].pair_id);
    EXPECT_EQ(first->index, 0u);
    EXPECT_EQ(first->total, 3u);
    answer(c, s.session_id, 3);
    EXPECT_FALSE(c.next_pair(s.session_id).has_value());
    EXPECT_EQ(c.session(s.session_id).cursor, 3u);
}

TEST(Campaign, PayloadIsBlinded) {
    CampaignFixture fx(2, {"esrgan", "bicubic", "srcnn"});
    Campaign c(fx.config(), fx.log_path(), fixed_clock());
    const auto s = c.start_session("dan");
    while (auto next = c.next_pair(s.session_id)) {
        for (const auto& text : {next->pair_id, next->left_ref, next->right_ref}) {
            for (const auto& m : fx.methods) EXPECT_EQ(text.find(m), std::string::npos) << text;
            for (const auto& img : fx.images) EXPECT_EQ(text.find(img), std::string::npos) << text;
        }
        c.submit_choice(s.session_id, next->pair_id, Choice::right);
    }
}

TEST(Campaign, SubmitAppendsOneLineAndAdvances) {
    CampaignFixture fx(2, {"m0", "m1", "m2"});
    Campaign c(fx.config(), fx.log_path(), fixed_clock());
    const auto s = c.start_session("erin");
    const auto next = c.next_pair(s.session_id);
    const auto r = c.submit_choice(s.session_id, next->pair_id, Choice::left);
    EXPECT_EQ(r.status, SubmitStatus::accepted);
    EXPECT_EQ(r.cursor, 1u);
    EXPECT_EQ(line_count(fx.log_path()), 1u);
    const auto ev = EventLog::read(fx.log_path());
    EXPECT_EQ(ev[0], (ChoiceEvent{"erin", next->pair_id, Choice::left, 1000}));
}

TEST(Campaign, DuplicateAndOutOfOrderRejected) {
    CampaignFixture fx(2, {"m0", "m1", "m2"});
    Campaign c(fx.config(), fx.log_path(), fixed_clock());
    const auto s = c.start_session("finn");
    const auto perm = c.permutation_for("finn");
    const auto first = c.next_pair(s.session_id)->pair_id;
    c.submit_choice(s.session_id, first, Choice::left);

    const auto dup = c.submit_choice(s.session_id, first, Choice::right);
    EXPECT_EQ(dup.status, SubmitStatus::duplicate);
    EXPECT_EQ(dup.cursor, 1u);
    const auto skip = c.submit_choice(s.session_id, c.pairs()[perm[3]].pair_id, Choice::left);
    EXPECT_EQ(skip.status, SubmitStatus::out_of_order);
    EXPECT_EQ(c.submit_choice(s.session_id, "p9999", Choice::left).status, SubmitStatus::out_of_order);
    EXPECT_EQ(line_count(fx.log_path()), 1u);
    EXPECT_THROW(c.submit_choice("feedfacefeedface", first, Choice::left), UnknownSession);
    EXPECT_THROW(c.next_pair("feedfacefeedface"), UnknownSession);
    EXPECT_THROW(c.start_session(""), PreconditionError);
}

TEST(Campaign, CrashAfterFlushBeforeAckIsAtMostOnce) {
    CampaignFixture fx(2, {"m0", "m1", "m2"});
    std::string pair_id, sid;
    {
        Campaign c(fx.config(), fx.log_path(), fixed_clock());
        sid = c.start_session("gus").session_id;
        pair_id = c.next_pair(sid)->pair_id;
    }
    // The event reached disk but the process died before acknowledging.
    {
        EventLog log(fx.log_path());
        log.append({"gus", pair_id, Choice::right, 5});
    }
    Campaign restarted(fx.config(), fx.log_path(), fixed_clock());
    EXPECT_EQ(restarted.start_session("gus").session_id, sid);
    EXPECT_EQ(restarted.session(sid).cursor, 1u);
    const auto retry = restarted.submit_choice(sid, pair_id, Choice::right);
    EXPECT_EQ(retry.status, SubmitStatus::duplicate);
    EXPECT_EQ(line_count(fx.log_path()), 1u);
}

TEST(Campaign, ReplayReproducesCursorsAndStudy) {
    CampaignFixture fx(3, {"m0", "m1", "m2", "m3"});
    std::map<std::string, std::size_t> cursors;
    {
        Campaign c(fx.config(), fx.log_path(), fixed_clock());
        std::size_t n = 3;
        for (const auto* who : {"h1", "h2", "h3"}) {
            const auto s = c.start_session(who);
            answer(c, s.session_id, n);
            n += 4;
            cursors[who] = c.session(s.session_id).cursor;
        }
    }
    Campaign c(fx.config(), fx.log_path(), fixed_clock());
    for (const auto& [who, cursor] : cursors) {
        EXPECT_EQ(c.session(c.session_id_for(who)).cursor, cursor);
        EXPECT_EQ(c.start_session(who).cursor, cursor);
    }
    const auto events = c.snapshot_events();
    EXPECT_EQ(events.size(), 3u + 7u + 11u);
    const auto a = run_study(PairIndex(c.pairs()), events);
    const auto b = run_study(PairIndex(c.pairs()), EventLog::read(fx.log_path()));
    EXPECT_EQ(a.step2.preferred, b.step2.preferred);
}

TEST(Campaign, LogFromAnotherCampaignRejected) {
    CampaignFixture fx(2, {"m0", "m1", "m2"});
    {
        EventLog log(fx.log_path());
        log.append({"x", "p9999", Choice::left, 1});
    }
    EXPECT_THROW(Campaign(fx.config(), fx.log_path(), fixed_clock()), Error);
}

TEST(Campaign, ServesPngWithEqualDimensions) {
    CampaignFixture fx(2, {"m0", "m1", "m2"}, 17, 14, 11);
    Campaign c(fx.config(), fx.log_path(), fixed_clock());
    const auto s = c.start_session("ivy");
    const auto next = c.next_pair(s.session_id);
    const auto left = decode_png(c.serve_image(next->left_ref));
    const auto right = decode_png(c.serve_image(next->right_ref));
    EXPECT_EQ(left.width(), right.width());
    EXPECT_EQ(left.height(), right.height());
    EXPECT_EQ(left.width(), 14);
    // The served pixels are the SR image's.
    const auto& p = c.pairs()[c.permutation_for("ivy")[0]];
    EXPECT_EQ(left, load_image(fx.dir.path() / "sr" / p.method_left / (p.image + ".pgm")));
    EXPECT_THROW(c.serve_image("0123456789abcdef"), UnknownImage);
    EXPECT_THROW(c.serve_image(next->left_ref + "0"), UnknownImage);
}

TEST(Campaign, MismatchedImageSizesRejected) {
    CampaignFixture fx(2, {"m0", "m1"});
    save_image(ImagePlane(5, 5, 10.0), fx.dir.path() / "sr" / "m1" / "img1.pgm");
    EXPECT_THROW(Campaign(fx.config(), fx.log_path(), fixed_clock()), Error);
}

TEST(Campaign, MissingImageRejected) {
    CampaignFixture fx(2, {"m0", "m1"});
    std::filesystem::remove(fx.dir.path() / "sr" / "m0" / "img0.pgm");
    EXPECT_THROW(Campaign(fx.config(), fx.log_path(), fixed_clock()), Error);
}

TEST(Campaign, StorageFailureLeavesCursor) {
    CampaignFixture fx(2, {"m0", "m1", "m2"});
    Campaign c(fx.config(), fx.log_path(), fixed_clock());
    const auto s = c.start_session("jay");
    answer(c, s.session_id, 1);
    const auto size = std::filesystem::file_size(fx.log_path());
    const auto next = c.next_pair(s.session_id)->pair_id;
    {
        std::signal(SIGXFSZ, SIG_IGN);
        rlimit old{};
        getrlimit(RLIMIT_FSIZE, &old);
        rlimit lim = old;
        lim.rlim_cur = size + 5;
        setrlimit(RLIMIT_FSIZE, &lim);
        EXPECT_THROW(c.submit_choice(s.session_id, next, Choice::left), Error);
        setrlimit(RLIMIT_FSIZE, &old);
    }
    EXPECT_EQ(c.session(s.session_id).cursor, 1u);
    EXPECT_EQ(std::filesystem::file_size(fx.log_path()), size);
    EXPECT_EQ(c.submit_choice(s.session_id, next, Choice::left).status, SubmitStatus::accepted);
}

TEST(Campaign, ConcurrentAnnotatorsRecordEveryChoiceOnce) {
    CampaignFixture fx(3, {"m0", "m1", "m2", "m3"});
    Campaign c(fx.config(), fx.log_path());
    std::vector<std::jthread> threads;
    for (int t = 0; t < 6; ++t) {
        threads.emplace_back([&c, t] {
            const auto s = c.start_session("t" + std::to_string(t));
            while (auto next = c.next_pair(s.session_id)) {
                // Retry each submission to exercise at-most-once handling.
                c.submit_choice(s.session_id, next->pair_id, Choice::left);
                c.submit_choice(s.session_id, next->pair_id, Choice::left);
            }
        });
    }
    threads.clear();
    EXPECT_EQ(line_count(fx.log_path()), 6u * 18u);
    EXPECT_EQ(EventLog::read(fx.log_path()).size(), 6u * 18u);
    for (const auto& p : c.progress()) EXPECT_EQ(p.answered, 18u);
}
