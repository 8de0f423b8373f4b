"""Question answering by few-shot semantic parsing into facts and answer set reasoning."""
