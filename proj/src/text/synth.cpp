// Copyright 2026 The RetroLens Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "retrolens/text/synth.hpp"

#include <array>
#include <string_view>

namespace retrolens::text {
namespace {

using Pool = std::vector<std::string_view>;

struct Template {
  Pool heads;
  Pool bodies;
  Pool tails;
};

const std::array<Template, kCategoryCount>& templates() {
  static const std::array<Template, kCategoryCount> kTemplates = {{
      // Traffic
      {{"welcome", "hello and welcome", "hi to", "a warm welcome to", "good evening to"},
       {"everyone joining the live room", "all the new friends in the stream", "everybody who just came in",
        "the friends from the recommendation page", "viewers arriving from the square", "new fans in the room"},
       {"please follow the host", "tap follow so you do not miss us", "share the stream with your friends",
        "invite your friends to watch", "remember to follow the channel", "turn on live notifications"}},
      // Interaction
      {{"tell me", "let me know", "type in the comments", "reply with", "drop a message about"},
       {"which color you like best", "your height and weight", "what size you usually wear",
        "one if you can hear me clearly", "what you want to see next", "where you are watching from"},
       {"and i will answer you", "so i can recommend a size", "i am reading every comment",
        "and i will pick someone", "i want to hear from you", "let us chat for a bit"}},
      // Selling
      {{"look at", "feel", "check out", "this is", "notice"},
       {"the soft breathable fabric", "the pure cotton material", "the fine stitching detail",
        "the waterproof coating", "the slim tailored cut", "the thick warm lining", "the stretchy elastic waist"},
       {"it fits every body type", "it washes without shrinking", "the quality is really premium",
        "it keeps its shape after washing", "it is comfortable all day", "the texture is very smooth"}},
      // Order
      {{"click", "tap", "go to", "open", "press"},
       {"the yellow cart below", "link number three", "the shopping bag icon", "the checkout button",
        "the product card on the left", "the order page"},
       {"and place your order", "then choose your size and pay", "to add it to your cart",
        "and complete the payment", "select the color and submit the order", "and check out right away"}},
      // Urge
      {{"hurry", "quick", "only", "last chance", "do not wait"},
       {"fifty pieces left in stock", "the discount ends in five minutes", "ten sets remaining at this price",
        "this deal is almost sold out", "the coupon expires very soon", "stock is running out fast"},
       {"grab it before it is gone", "once it sells out it will not return", "the price goes up after tonight",
        "buy now or miss it", "we cannot restock this offer", "move fast friends"}},
      // Atmosphere
      {{"haha", "wow", "oh my", "yay", "hey hey"},
       {"this is so much fun tonight", "the music is great", "we are having a party in here",
        "the vibe in the room is amazing", "you guys make me laugh", "what a lovely night together"},
       {"thank you all for the love", "let us dance together", "happy happy happy",
        "you are all the best", "i love this family", "let us keep the energy up"}},
  }};
  return kTemplates;
}

const Pool& fillers() {
  static const Pool kFillers = {"okay", "so", "everyone", "you know", "really", "now", "alright", "friends"};
  return kFillers;
}

std::string_view pick(const Pool& pool, Rng& rng) { return pool[rng.index(pool.size())]; }

}  // namespace

std::string sample_pitch_sentence(PitchCategory category, Rng& rng) {
  const auto& t = templates()[index_of(category)];
  std::string s;
  if (rng.uniform() < 0.4) {
    s += pick(fillers(), rng);
    s += ' ';
  }
  s += pick(t.heads, rng);
  s += ' ';
  s += pick(t.bodies, rng);
  if (rng.uniform() < 0.7) {
    s += ' ';
    s += pick(t.tails, rng);
  }
  if (rng.uniform() < 0.2) {
    // Borrowed clause from a different category.
    auto other = static_cast<PitchCategory>((index_of(category) + 1 + rng.index(kCategoryCount - 1)) % kCategoryCount);
    const auto& o = templates()[index_of(other)];
    s += ' ';
    s += pick(rng.uniform() < 0.5 ? o.bodies : o.tails, rng);
  }
  if (rng.uniform() < 0.3) {
    s += ' ';
    s += pick(fillers(), rng);
  }
  return s;
}

std::vector<LabeledSentence> generate_labeled_corpus(std::uint64_t seed, std::size_t per_category) {
  Rng rng(seed);
  std::vector<LabeledSentence> out;
  out.reserve(per_category * kCategoryCount);
  for (std::size_t i = 0; i < per_category; ++i)
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
      auto cat = static_cast<PitchCategory>(c);
      out.push_back({sample_pitch_sentence(cat, rng), cat});
    }
  return out;
}

std::string sample_comment(int topic, Rng& rng) {
  static const Pool kQuestionHeads = {"how much is", "what size for", "is there a discount on", "does it ship",
                                      "what material is", "any other color for"};
  static const Pool kQuestionBodies = {"the jacket", "the black one", "the coat", "link three", "the dress",
                                       "this sweater"};
  static const Pool kReactions = {"love it", "so pretty", "haha host so funny", "great vibe tonight",
                                  "beautiful", "you are amazing", "hello from up north", "lol"};
  static const Pool kReactionTails = {"", "", "!!", " so cute", " hahaha", " love you"};
  std::string s;
  if (topic == 0) {
    s += pick(kQuestionHeads, rng);
    s += ' ';
    s += pick(kQuestionBodies, rng);
  } else {
    s += pick(kReactions, rng);
    s += pick(kReactionTails, rng);
  }
  return s;
}

}  // namespace retrolens::text
