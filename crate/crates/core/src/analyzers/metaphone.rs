//! Double metaphone phonetic encoding (Lawrence Philips), codes of at most
//! four characters.
//!
//! `0` stands for the "th" sound and `X` for "sh"/"ch". Non-letters are
//! skipped, so numeric tokens encode to empty codes.

use alloc::string::String;
use alloc::vec::Vec;

const MAX_LEN: usize = 4;

/// Primary and alternate encodings; the alternate may equal the primary.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PhoneticCode {
    pub primary: String,
    pub alternate: String,
}

impl PhoneticCode {
    pub fn is_empty(&self) -> bool {
        self.primary.is_empty() && self.alternate.is_empty()
    }

    /// Distinct non-empty codes.
    pub fn codes(&self) -> impl Iterator<Item = &str> {
        let alt = (self.alternate != self.primary).then_some(self.alternate.as_str());
        core::iter::once(self.primary.as_str()).chain(alt).filter(|c| !c.is_empty())
    }

    /// True when the two words share a primary or alternate code.
    pub fn intersects(&self, other: &PhoneticCode) -> bool {
        self.codes().any(|a| other.codes().any(|b| a == b))
    }
}

pub fn double_metaphone(word: &str) -> PhoneticCode {
    let chars: Vec<char> = word.trim().chars().flat_map(char::to_uppercase).collect();
    if !chars.iter().any(|c| c.is_alphabetic()) {
        return PhoneticCode::default();
    }
    Encoder::new(chars).run()
}

struct Encoder {
    v: Vec<char>,
    slavo_germanic: bool,
    primary: String,
    alternate: String,
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'A' | 'E' | 'I' | 'O' | 'U' | 'Y')
}

impl Encoder {
    fn new(v: Vec<char>) -> Self {
        let mut enc = Self { v, slavo_germanic: false, primary: String::new(), alternate: String::new() };
        enc.slavo_germanic = enc.v.iter().any(|&c| c == 'W' || c == 'K')
            || enc.find("CZ")
            || enc.find("WITZ");
        enc
    }

    fn len(&self) -> isize {
        self.v.len() as isize
    }

    fn find(&self, needle: &str) -> bool {
        let n = needle.chars().count() as isize;
        (0..=self.len() - n).any(|i| self.at(i, &[needle]))
    }

    fn char_at(&self, i: isize) -> char {
        if i < 0 || i >= self.len() {
            '\0'
        } else {
            self.v[i as usize]
        }
    }

    /// Whether the text at `start` equals one of `options` (all of equal length).
    fn at(&self, start: isize, options: &[&str]) -> bool {
        options.iter().any(|opt| {
            let n = opt.chars().count() as isize;
            start >= 0
                && start + n <= self.len()
                && opt.chars().zip(&self.v[start as usize..]).all(|(a, &b)| a == b)
        })
    }

    fn complete(&self) -> bool {
        self.primary.len() >= MAX_LEN && self.alternate.len() >= MAX_LEN
    }

    fn push_primary(&mut self, s: &str) {
        for c in s.chars() {
            if self.primary.len() < MAX_LEN {
                self.primary.push(c);
            }
        }
    }

    fn push_alternate(&mut self, s: &str) {
        for c in s.chars() {
            if self.alternate.len() < MAX_LEN {
                self.alternate.push(c);
            }
        }
    }

    fn add(&mut self, s: &str) {
        self.push_primary(s);
        self.push_alternate(s);
    }

    fn add2(&mut self, primary: &str, alternate: &str) {
        self.push_primary(primary);
        self.push_alternate(alternate);
    }

    fn run(mut self) -> PhoneticCode {
        let mut i: isize = if self.at(0, &["GN", "KN", "PN", "WR", "PS"]) { 1 } else { 0 };
        while !self.complete() && i < self.len() {
            let next = self.char_at(i + 1);
            i = match self.char_at(i) {
                'A' | 'E' | 'I' | 'O' | 'U' | 'Y' => {
                    if i == 0 {
                        self.add("A");
                    }
                    i + 1
                }
                'B' => {
                    self.add("P");
                    if next == 'B' { i + 2 } else { i + 1 }
                }
                'Ç' => {
                    self.add("S");
                    i + 1
                }
                'C' => self.c(i),
                'D' => self.d(i),
                'F' => {
                    self.add("F");
                    if next == 'F' { i + 2 } else { i + 1 }
                }
                'G' => self.g(i),
                'H' => {
                    if (i == 0 || is_vowel(self.char_at(i - 1))) && is_vowel(next) {
                        self.add("H");
                        i + 2
                    } else {
                        i + 1
                    }
                }
                'J' => self.j(i),
                'K' => {
                    self.add("K");
                    if next == 'K' { i + 2 } else { i + 1 }
                }
                'L' => self.l(i),
                'M' => {
                    self.add("M");
                    let skip = next == 'M'
                        || (self.at(i - 1, &["UMB"])
                            && (i + 1 == self.len() - 1 || self.at(i + 2, &["ER"])));
                    if skip { i + 2 } else { i + 1 }
                }
                'N' => {
                    self.add("N");
                    if next == 'N' { i + 2 } else { i + 1 }
                }
                'Ñ' => {
                    self.add("N");
                    i + 1
                }
                'P' => {
                    if next == 'H' {
                        self.add("F");
                        i + 2
                    } else {
                        self.add("P");
                        if self.at(i + 1, &["P", "B"]) { i + 2 } else { i + 1 }
                    }
                }
                'Q' => {
                    self.add("K");
                    if next == 'Q' { i + 2 } else { i + 1 }
                }
                'R' => {
                    if i == self.len() - 1
                        && !self.slavo_germanic
                        && self.at(i - 2, &["IE"])
                        && !self.at(i - 4, &["ME", "MA"])
                    {
                        self.push_alternate("R");
                    } else {
                        self.add("R");
                    }
                    if next == 'R' { i + 2 } else { i + 1 }
                }
                'S' => self.s(i),
                'T' => self.t(i),
                'V' => {
                    self.add("F");
                    if next == 'V' { i + 2 } else { i + 1 }
                }
                'W' => self.w(i),
                'X' => self.x(i),
                'Z' => self.z(i),
                _ => i + 1,
            };
        }
        PhoneticCode { primary: self.primary, alternate: self.alternate }
    }

    fn c(&mut self, i: isize) -> isize {
        if self.c_is_k_after_ach(i) {
            self.add("K");
            i + 2
        } else if i == 0 && self.at(i, &["CAESAR"]) {
            self.add("S");
            i + 2
        } else if self.at(i, &["CH"]) {
            self.ch(i)
        } else if self.at(i, &["CZ"]) && !self.at(i - 2, &["WICZ"]) {
            self.add2("S", "X");
            i + 2
        } else if self.at(i + 1, &["CIA"]) {
            self.add("X");
            i + 3
        } else if self.at(i, &["CC"]) && !(i == 1 && self.char_at(0) == 'M') {
            if self.at(i + 2, &["I", "E", "H"]) && !self.at(i + 2, &["HU"]) {
                if (i == 1 && self.char_at(i - 1) == 'A') || self.at(i - 1, &["UCCEE", "UCCES"]) {
                    self.add("KS");
                } else {
                    self.add("X");
                }
                i + 3
            } else {
                self.add("K");
                i + 2
            }
        } else if self.at(i, &["CK", "CG", "CQ"]) {
            self.add("K");
            i + 2
        } else if self.at(i, &["CI", "CE", "CY"]) {
            if self.at(i, &["CIO", "CIE", "CIA"]) {
                self.add2("S", "X");
            } else {
                self.add("S");
            }
            i + 2
        } else {
            self.add("K");
            if self.at(i + 1, &[" C", " Q", " G"]) {
                i + 3
            } else if self.at(i + 1, &["C", "K", "Q"]) && !self.at(i + 1, &["CE", "CI"]) {
                i + 2
            } else {
                i + 1
            }
        }
    }

    fn c_is_k_after_ach(&self, i: isize) -> bool {
        if self.at(i, &["CHIA"]) {
            return true;
        }
        if i <= 1 || is_vowel(self.char_at(i - 2)) || !self.at(i - 1, &["ACH"]) {
            return false;
        }
        let c = self.char_at(i + 2);
        (c != 'I' && c != 'E') || self.at(i - 2, &["BACHER", "MACHER"])
    }

    // Greek and Germanic CH are separate rules upstream; kept apart here too.
    #[allow(clippy::if_same_then_else)]
    fn ch(&mut self, i: isize) -> isize {
        if i > 0 && self.at(i, &["CHAE"]) {
            self.add2("K", "X");
        } else if i == 0
            && (self.at(i + 1, &["HARAC", "HARIS"]) || self.at(i + 1, &["HOR", "HYM", "HIA", "HEM"]))
            && !self.at(0, &["CHORE"])
        {
            self.add("K");
        } else if self.at(0, &["VAN ", "VON "])
            || self.at(0, &["SCH"])
            || self.at(i - 2, &["ORCHES", "ARCHIT", "ORCHID"])
            || self.at(i + 2, &["T", "S"])
            || ((self.at(i - 1, &["A", "O", "U", "E"]) || i == 0)
                && (self.at(i + 2, &["L", "R", "N", "M", "B", "H", "F", "V", "W", " "])
                    || i + 1 == self.len() - 1))
        {
            self.add("K");
        } else if i > 0 {
            if self.at(0, &["MC"]) {
                self.add("K");
            } else {
                self.add2("X", "K");
            }
        } else {
            self.add("X");
        }
        i + 2
    }

    fn d(&mut self, i: isize) -> isize {
        if self.at(i, &["DG"]) {
            if self.at(i + 2, &["I", "E", "Y"]) {
                self.add("J");
                i + 3
            } else {
                self.add("TK");
                i + 2
            }
        } else if self.at(i, &["DT", "DD"]) {
            self.add("T");
            i + 2
        } else {
            self.add("T");
            i + 1
        }
    }

    fn g(&mut self, i: isize) -> isize {
        let next = self.char_at(i + 1);
        if next == 'H' {
            return self.gh(i);
        }
        if next == 'N' {
            if i == 1 && is_vowel(self.char_at(0)) && !self.slavo_germanic {
                self.add2("KN", "N");
            } else if !self.at(i + 2, &["EY"]) && next != 'Y' && !self.slavo_germanic {
                self.add2("N", "KN");
            } else {
                self.add("KN");
            }
            return i + 2;
        }
        if self.at(i + 1, &["LI"]) && !self.slavo_germanic {
            self.add2("KL", "L");
            return i + 2;
        }
        if i == 0
            && (next == 'Y'
                || self.at(
                    i + 1,
                    &["ES", "EP", "EB", "EL", "EY", "IB", "IL", "IN", "IE", "EI", "ER"],
                ))
        {
            self.add2("K", "J");
            return i + 2;
        }
        if (self.at(i + 1, &["ER"]) || next == 'Y')
            && !self.at(0, &["DANGER", "RANGER", "MANGER"])
            && !self.at(i - 1, &["E", "I"])
            && !self.at(i - 1, &["RGY", "OGY"])
        {
            self.add2("K", "J");
            return i + 2;
        }
        if self.at(i + 1, &["E", "I", "Y"]) || self.at(i - 1, &["AGGI", "OGGI"]) {
            if self.at(0, &["VAN ", "VON "]) || self.at(0, &["SCH"]) || self.at(i + 1, &["ET"]) {
                self.add("K");
            } else if self.at(i + 1, &["IER"]) {
                self.add("J");
            } else {
                self.add2("J", "K");
            }
            return i + 2;
        }
        self.add("K");
        if next == 'G' { i + 2 } else { i + 1 }
    }

    fn gh(&mut self, i: isize) -> isize {
        if i > 0 && !is_vowel(self.char_at(i - 1)) {
            self.add("K");
        } else if i == 0 {
            if self.char_at(i + 2) == 'I' {
                self.add("J");
            } else {
                self.add("K");
            }
        } else if (i > 1 && self.at(i - 2, &["B", "H", "D"]))
            || (i > 2 && self.at(i - 3, &["B", "H", "D"]))
            || (i > 3 && self.at(i - 4, &["B", "H"]))
        {
            // silent, as in "hugh"
        } else if i > 2 && self.char_at(i - 1) == 'U' && self.at(i - 3, &["C", "G", "L", "R", "T"]) {
            self.add("F");
        } else if i > 0 && self.char_at(i - 1) != 'I' {
            self.add("K");
        }
        i + 2
    }

    fn j(&mut self, i: isize) -> isize {
        if self.at(i, &["JOSE"]) || self.at(0, &["SAN "]) {
            if (i == 0 && self.char_at(i + 4) == ' ') || self.len() == 4 || self.at(0, &["SAN "]) {
                self.add("H");
            } else {
                self.add2("J", "H");
            }
            return i + 1;
        }
        if i == 0 {
            self.add2("J", "A");
        } else if is_vowel(self.char_at(i - 1))
            && !self.slavo_germanic
            && matches!(self.char_at(i + 1), 'A' | 'O')
        {
            self.add2("J", "H");
        } else if i == self.len() - 1 {
            self.push_primary("J");
        } else if !self.at(i + 1, &["L", "T", "K", "S", "N", "M", "B", "Z"])
            && !self.at(i - 1, &["S", "K", "L"])
        {
            self.add("J");
        }
        if self.char_at(i + 1) == 'J' { i + 2 } else { i + 1 }
    }

    fn l(&mut self, i: isize) -> isize {
        if self.char_at(i + 1) != 'L' {
            self.add("L");
            return i + 1;
        }
        let n = self.len();
        let spanish = (i == n - 3 && self.at(i - 1, &["ILLO", "ILLA", "ALLE"]))
            || ((self.at(n - 2, &["AS", "OS"]) || self.at(n - 1, &["A", "O"]))
                && self.at(i - 1, &["ALLE"]));
        if spanish {
            self.push_primary("L");
        } else {
            self.add("L");
        }
        i + 2
    }

    fn s(&mut self, i: isize) -> isize {
        if self.at(i - 1, &["ISL", "YSL"]) {
            return i + 1;
        }
        if i == 0 && self.at(i, &["SUGAR"]) {
            self.add2("X", "S");
            return i + 1;
        }
        if self.at(i, &["SH"]) {
            if self.at(i + 1, &["HEIM", "HOEK", "HOLM", "HOLZ"]) {
                self.add("S");
            } else {
                self.add("X");
            }
            return i + 2;
        }
        if self.at(i, &["SIO", "SIA"]) || self.at(i, &["SIAN"]) {
            if self.slavo_germanic {
                self.add("S");
            } else {
                self.add2("S", "X");
            }
            return i + 3;
        }
        if (i == 0 && self.at(i + 1, &["M", "N", "L", "W"])) || self.at(i + 1, &["Z"]) {
            self.add2("S", "X");
            return if self.at(i + 1, &["Z"]) { i + 2 } else { i + 1 };
        }
        if self.at(i, &["SC"]) {
            return self.sc(i);
        }
        if i == self.len() - 1 && self.at(i - 2, &["AI", "OI"]) {
            self.push_alternate("S");
        } else {
            self.add("S");
        }
        if self.at(i + 1, &["S", "Z"]) { i + 2 } else { i + 1 }
    }

    fn sc(&mut self, i: isize) -> isize {
        if self.char_at(i + 2) == 'H' {
            if self.at(i + 3, &["OO", "ER", "EN", "UY", "ED", "EM"]) {
                if self.at(i + 3, &["ER", "EN"]) {
                    self.add2("X", "SK");
                } else {
                    self.add("SK");
                }
            } else if i == 0 && !is_vowel(self.char_at(3)) && self.char_at(3) != 'W' {
                self.add2("X", "S");
            } else {
                self.add("X");
            }
        } else if self.at(i + 2, &["I", "E", "Y"]) {
            self.add("S");
        } else {
            self.add("SK");
        }
        i + 3
    }

    fn t(&mut self, i: isize) -> isize {
        if self.at(i, &["TION"]) || self.at(i, &["TIA", "TCH"]) {
            self.add("X");
            i + 3
        } else if self.at(i, &["TH"]) || self.at(i, &["TTH"]) {
            if self.at(i + 2, &["OM", "AM"]) || self.at(0, &["VAN ", "VON "]) || self.at(0, &["SCH"]) {
                self.add("T");
            } else {
                self.add2("0", "T");
            }
            i + 2
        } else {
            self.add("T");
            if self.at(i + 1, &["T", "D"]) { i + 2 } else { i + 1 }
        }
    }

    fn w(&mut self, i: isize) -> isize {
        if self.at(i, &["WR"]) {
            self.add("R");
            return i + 2;
        }
        let next_vowel = is_vowel(self.char_at(i + 1));
        if i == 0 && (next_vowel || self.at(i, &["WH"])) {
            if next_vowel {
                self.add2("A", "F");
            } else {
                self.add("A");
            }
            i + 1
        } else if (i == self.len() - 1 && is_vowel(self.char_at(i - 1)))
            || self.at(i - 1, &["EWSKI", "EWSKY", "OWSKI", "OWSKY"])
            || self.at(0, &["SCH"])
        {
            self.push_alternate("F");
            i + 1
        } else if self.at(i, &["WICZ", "WITZ"]) {
            self.add2("TS", "FX");
            i + 4
        } else {
            i + 1
        }
    }

    fn x(&mut self, i: isize) -> isize {
        if i == 0 {
            self.add("S");
            return i + 1;
        }
        let french = i == self.len() - 1
            && (self.at(i - 3, &["IAU", "EAU"]) || self.at(i - 2, &["AU", "OU"]));
        if !french {
            self.add("KS");
        }
        if self.at(i + 1, &["C", "X"]) { i + 2 } else { i + 1 }
    }

    fn z(&mut self, i: isize) -> isize {
        if self.char_at(i + 1) == 'H' {
            self.add("J");
            return i + 2;
        }
        if self.at(i + 1, &["ZO", "ZI", "ZA"])
            || (self.slavo_germanic && i > 0 && self.char_at(i - 1) != 'T')
        {
            self.add2("S", "TS");
        } else {
            self.add("S");
        }
        if self.char_at(i + 1) == 'Z' { i + 2 } else { i + 1 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dm(w: &str) -> (String, String) {
        let c = double_metaphone(w);
        (c.primary, c.alternate)
    }

    #[test]
    fn reference_codes() {
        assert_eq!(dm("smith"), ("SM0".into(), "XMT".into()));
        assert_eq!(dm("schmidt"), ("XMT".into(), "SMT".into()));
        assert_eq!(dm("john"), ("JN".into(), "AN".into()));
        assert_eq!(dm("jon"), ("JN".into(), "AN".into()));
        assert_eq!(dm("peter"), ("PTR".into(), "PTR".into()));
    }

    #[test]
    fn empty_and_numeric_words_have_empty_codes() {
        assert!(double_metaphone("").is_empty());
        assert!(double_metaphone("2000").is_empty());
        assert!(double_metaphone("   ").is_empty());
    }

    #[test]
    fn case_insensitive() {
        assert_eq!(double_metaphone("Schmidt"), double_metaphone("schmidt"));
    }

    #[test]
    fn code_intersection() {
        assert!(double_metaphone("smith").intersects(&double_metaphone("schmidt")));
        assert!(!double_metaphone("peter").intersects(&double_metaphone("pete")));
        assert!(!PhoneticCode::default().intersects(&PhoneticCode::default()));
    }
}
