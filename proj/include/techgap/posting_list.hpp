#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace techgap {

/// Sorted, duplicate-free id list stored as LEB128 varints of successive
/// gaps (the first gap is taken from zero).
class PostingList {
 public:
  PostingList() = default;

  /// Throws InvalidArgument unless `ids` is strictly increasing.
  static PostingList encode(std::span<const std::uint32_t> ids);

  std::vector<std::uint32_t> decode() const;

  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }
  std::span<const std::uint8_t> bytes() const { return bytes_; }

  /// Sequential decoder over the compressed bytes.
  class Cursor {
   public:
    explicit Cursor(const PostingList& list) : list_(&list) {}
    bool next(std::uint32_t& out);

   private:
    const PostingList* list_;
    std::size_t offset_ = 0;
    std::size_t emitted_ = 0;
    std::uint32_t last_ = 0;
  };

  bool operator==(const PostingList&) const = default;

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t count_ = 0;
};

/// Sorted union of several lists.
std::vector<std::uint32_t> union_postings(std::span<const PostingList* const> lists);

}  // namespace techgap
