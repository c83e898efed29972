pub mod align;
pub mod backends;
pub mod evalkit;
pub mod markup;
pub mod pipelines;

#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/styled-text.md")]
    pub mod styled_text {}
    #[doc = include_str!("../../../book/src/alignment.md")]
    pub mod alignment {}
    #[doc = include_str!("../../../book/src/backends.md")]
    pub mod backends {}
    #[doc = include_str!("../../../book/src/methods.md")]
    pub mod methods {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    pub mod evaluation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
